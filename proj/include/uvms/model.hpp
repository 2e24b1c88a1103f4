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

// Declarative description of an underwater vehicle-manipulator system and the
// canonical lumped parameter vector that the estimator identifies.
//
// Vehicle-level 6-vectors and 6x6 matrices (velocities, wrenches, drag
// coefficients, added mass) use the marine ordering
// (surge, sway, heave, roll, pitch, yaw). Spatial quantities inside the
// dynamics use the angular-first ordering of spatial.hpp.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvms/spatial.hpp"

namespace uvms {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LayoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Swaps the two 3-blocks: marine ordering <-> angular-first ordering. The
/// permutation is its own inverse.
inline Vec6 swap_halves(const Vec6& v) {
  Vec6 out;
  out << v.tail<3>(), v.head<3>();
  return out;
}
Mat6 swap_halves(const Mat6& m);

inline constexpr int kVehicle = -1;

struct JointDescriptor {
  /// Unit motion subspace s_i: angular part for revolute joints, linear part
  /// for prismatic joints.
  Vec6 axis = (Vec6() << 0, 0, 1, 0, 0, 0).finished();
  /// Parent link index, or kVehicle when mounted on the vehicle.
  int parent = kVehicle;
  /// Parent frame -> joint frame at q = 0.
  PluckerTransform placement;
  double gear_ratio = 1.0;
  SpatialInertia rotor_inertia;
  double static_friction = 0.0;
  double viscous_friction = 0.0;

  bool revolute() const { return axis.tail<3>().squaredNorm() == 0.0; }
  /// ^iX_lambda(i) at joint coordinate q.
  PluckerTransform transform(double q) const;
  SpatialMotion subspace() const { return SpatialMotion::FromVector(axis); }
};

struct LinkHydrodynamics {
  /// Added mass M_A (positive convention, marine ordering).
  Mat6 added_mass = Mat6::Zero();
  /// Fossen-sign drag derivatives, <= 0.
  Vec6 linear_drag = Vec6::Zero();
  Vec6 quadratic_drag = Vec6::Zero();
  double buoyancy = 0.0;
  Vec3 center_of_buoyancy = Vec3::Zero();

  bool is_zero() const;
};

struct Link {
  std::string name;
  JointDescriptor joint;
  /// Rigid inertia about the link frame origin.
  SpatialInertia inertia;
  LinkHydrodynamics hydro;
};

struct VehicleDescriptor {
  /// Rigid-body inertia about the body origin, angular-first ordering.
  SpatialInertia rigid_inertia;
  LinkHydrodynamics hydro;
  Vec3 cg = Vec3::Zero();
  double weight = 0.0;

  /// Rigid + added mass in marine ordering.
  Mat6 effective_inertia() const;
};

struct WeightBounds {
  double w_min = 0.0;
  double w_max = 1e12;
};

enum class GravityMode {
  /// Gravity enters as an offset on the base acceleration of the outward pass.
  kBaseAcceleration,
  /// Gravity enters as an explicit per-body wrench.
  kExplicitWrench,
};

struct UvmsModel {
  VehicleDescriptor vehicle;
  std::vector<Link> links;
  WeightBounds bounds;
  double gravity = 9.81;
  GravityMode gravity_mode = GravityMode::kBaseAcceleration;

  int num_links() const { return static_cast<int>(links.size()); }
  int dof() const { return 6 + num_links(); }
  int num_parameters() const;
  /// Throws ModelError on a malformed description.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Parameter layout

namespace param {

inline constexpr int kVehicleInertia = 0;
inline constexpr int kVehicleInertiaCount = 10;
inline constexpr int kDragLinear = 10;
inline constexpr int kDragQuadratic = 16;
inline constexpr int kRestoring = 22;
inline constexpr int kWeight = 22;
inline constexpr int kBuoyancy = 23;
inline constexpr int kVehicleCount = 27;
inline constexpr int kLinkBlock = 12;

enum LinkSlot {
  kMass = 0,
  kFirstMomentX,
  kFirstMomentY,
  kFirstMomentZ,
  kIxx,
  kIxy,
  kIxz,
  kIyy,
  kIyz,
  kIzz,
  kViscous,
  kCoulomb,
};

constexpr int link_offset(int link) { return kVehicleCount + kLinkBlock * link; }
constexpr int count(int num_links) { return kVehicleCount + kLinkBlock * num_links; }

/// Human readable name, e.g. "vehicle.M[0,4]" or "link2.Ixx" (1-based links).
std::string name(int index, int num_links);

}  // namespace param

/// Placement of the four coupling lumps inside the 6x6 vehicle inertia.
struct VehicleInertiaLayout {
  std::array<std::array<int, 2>, 4> couplings{{{0, 4}, {1, 3}, {1, 5}, {2, 4}}};
};

struct VehicleLumps {
  std::array<double, 10> inertia{};
  Vec6 drag_linear = Vec6::Zero();
  Vec6 drag_quadratic = Vec6::Zero();
  /// [W, B, x_g W - x_b B, y_g W - y_b B, z_g W - z_b B]
  std::array<double, 5> restoring{};
};

struct LinkBlock {
  double mass = 0.0;
  Vec3 first_moment = Vec3::Zero();
  /// Ixx, Ixy, Ixz, Iyy, Iyz, Izz about the link frame origin.
  std::array<double, 6> inertia{};
  double viscous = 0.0;
  double coulomb = 0.0;

  Mat3 inertia_matrix() const;
  SpatialInertia spatial_inertia() const {
    return SpatialInertia::FromParameters(mass, first_moment, inertia_matrix());
  }
};

struct ParameterView {
  VehicleLumps vehicle;
  std::vector<LinkBlock> links;
};

/// Lumped parameter vector pi = [pi_v; pi_m], length 27 + 12 n.
class ParameterVector {
 public:
  explicit ParameterVector(int num_links);
  /// Throws LayoutError unless size == 27 + 12 n for some n >= 0.
  explicit ParameterVector(VecX values);

  int num_links() const { return num_links_; }
  int size() const { return static_cast<int>(values_.size()); }
  const VecX& values() const { return values_; }
  VecX& values() { return values_; }
  double operator[](int i) const { return values_[i]; }
  double& operator[](int i) { return values_[i]; }

  auto vehicle_inertia() const { return values_.segment<10>(param::kVehicleInertia); }
  auto link_block(int j) const { return values_.segment<12>(param::link_offset(j)); }

 private:
  VecX values_;
  int num_links_ = 0;
};

ParameterVector pack(const VehicleLumps& vehicle, const std::vector<LinkBlock>& links);
ParameterView unpack(const ParameterVector& pi);

/// 6x6 symmetric effective vehicle inertia from the ten inertial lumps:
/// entries 0-5 on the diagonal, 6-9 on the coupling positions.
Mat6 build_vehicle_inertia(const Eigen::Matrix<double, 10, 1>& lumps,
                           const VehicleInertiaLayout& layout = {});

/// Density-realizability certificate [[0.5 tr(I) 1 - I, h], [h^T, m]].
using PseudoInertia = Mat4;
PseudoInertia build_pseudo_inertia(const Eigen::Matrix<double, 12, 1>& block);
PseudoInertia build_pseudo_inertia(const LinkBlock& block);

double min_eigenvalue(const MatX& symmetric);

struct ConstraintViolation {
  enum class Kind {
    kVehicleInertia,
    kPseudoInertia,
    kViscousFriction,
    kCoulombFriction,
    kLinearDamping,
    kQuadraticDamping,
    kWeightBounds,
  };
  Kind kind;
  /// Joint / link (1-based), DOF (0-based) or -1.
  int index = -1;
  double value = 0.0;
  std::string message;
};

/// Empty iff pi lies in the physically consistent set. PSD checks accept
/// eigenvalues down to `eigen_tolerance`.
std::vector<ConstraintViolation> feasibility_report(const ParameterVector& pi,
                                                    const WeightBounds& bounds,
                                                    double eigen_tolerance = -1e-9);

/// [W, B, x_g W - x_b B, y_g W - y_b B, z_g W - z_b B] of a vehicle.
std::array<double, 5> restoring_lumps(const VehicleDescriptor& vehicle);

/// Projects a model onto the lumped parameterization. Exact when the model is
/// lumped; otherwise everything outside the lump layout is discarded.
ParameterVector lumped_parameters(const UvmsModel& model,
                                  const VehicleInertiaLayout& layout = {});

/// Kinematic skeleton of `skeleton` (joints, gear ratios, gravity) carrying the
/// dynamics described by `pi`. Link hydrodynamics and rotor inertias are
/// dropped: the result is a lumped model.
UvmsModel with_parameters(const UvmsModel& skeleton, const ParameterVector& pi,
                          const VehicleInertiaLayout& layout = {});

/// True when every dynamic effect of the model is representable by the lumps.
bool is_lumped(const UvmsModel& model, double tol = 1e-12,
               const VehicleInertiaLayout& layout = {});

}  // namespace uvms
