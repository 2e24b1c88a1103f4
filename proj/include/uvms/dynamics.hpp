// Copyright 2026 The uvms-id Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Hydrodynamics-informed recursive Newton-Euler inverse dynamics with rotor
// dynamics, forward dynamics and a fixed-step RK4 integrator.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvms/model.hpp"
#include "uvms/spatial.hpp"

namespace uvms {

class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularInertiaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneralizedState {
  /// Pose: north, east, down, roll, pitch, yaw.
  Vec6 eta = Vec6::Zero();
  /// Body velocity u, v, w, p, q, r.
  Vec6 nu = Vec6::Zero();
  Vec6 nu_dot = Vec6::Zero();
  VecX mu;
  VecX mu_dot;
  VecX mu_ddot;

  static GeneralizedState Zero(int num_joints);
  int num_joints() const { return static_cast<int>(mu.size()); }
  /// [nu; mu_dot]
  VecX velocity() const;
  /// [nu_dot; mu_ddot]
  VecX acceleration() const;
  void set_acceleration(const VecX& acc);
  /// Throws StateError on dimension mismatch, non-finite entries or a pitch
  /// at the Euler singularity.
  void validate(int num_joints) const;
};

struct GeneralizedForce {
  /// Vehicle wrench X, Y, Z, K, M, N.
  Vec6 tau_v = Vec6::Zero();
  VecX tau_m;

  static GeneralizedForce Zero(int num_joints) {
    return {Vec6::Zero(), VecX::Zero(num_joints)};
  }
  static GeneralizedForce FromStacked(const VecX& tau);
  VecX stacked() const;
};

/// Body-to-world rotation for the Euler angles in eta.
Mat3 body_to_world(const Vec6& eta);
/// eta_dot = J(eta) nu. Throws StateError when |pitch| >= pi/2.
Mat6 euler_kinematics(const Vec6& eta);

struct InverseDynamics {
  /// Total vehicle wrench required (angular first).
  SpatialForce tau_v;
  VecX tau_motor;
  /// tau_mv: wrench the manipulator exerts on the vehicle, so that
  /// tau_v + tau_mv equals the vehicle-only left-hand side.
  SpatialForce coupling;

  GeneralizedForce generalized() const {
    return {swap_halves(tau_v.vector()), tau_motor};
  }
  Vec6 coupling_marine() const { return swap_halves(coupling.vector()); }
};

InverseDynamics hydro_rnea(const UvmsModel& model, const GeneralizedState& state);

struct MassMatrixAndBias {
  MatX mass;
  VecX bias;
};

/// M from unit-acceleration evaluations minus the zero-acceleration call;
/// h is the zero-acceleration call.
MassMatrixAndBias mass_matrix_and_bias(const UvmsModel& model,
                                       const GeneralizedState& state);

/// Solves M zeta_ddot = tau - h. Accelerations stored in `state` are ignored.
/// Throws SingularInertiaError when cond(M) > 1e12.
VecX forward_dynamics(const UvmsModel& model, const GeneralizedState& state,
                      const VecX& tau);

struct TrajectorySample {
  double t = 0.0;
  /// Includes the accelerations produced by the dynamics at this sample.
  GeneralizedState state;
  GeneralizedForce force;
  /// tau_mv in marine ordering.
  Vec6 coupling = Vec6::Zero();
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  bool truncated = false;
  std::string diagnostic;
};

using Controller = std::function<GeneralizedForce(double t, const GeneralizedState&)>;
using ModelAt = std::function<const UvmsModel&(double t)>;

/// Fixed-step RK4 on (eta, nu, mu, mu_dot). Records round(duration / dt)
/// samples at t_k = k dt; each sample stores the force applied at t_k and the
/// acceleration the dynamics returned for it.
Trajectory simulate(const ModelAt& model_at, const GeneralizedState& initial,
                    const Controller& controller, double dt, double duration);
Trajectory simulate(const UvmsModel& model, const GeneralizedState& initial,
                    const Controller& controller, double dt, double duration);

/// Kinetic energy of vehicle (rigid + added mass) and links, plus the
/// potential of gravity and buoyancy. Used to check conservation.
double mechanical_energy(const UvmsModel& model, const GeneralizedState& state);

}  // namespace uvms
