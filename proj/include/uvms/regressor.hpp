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

// Regressor matrices mapping the lumped parameter vector to generalized
// forces: vehicle rows predict tau_v + tau_mv, manipulator rows the motor
// torques.

#include "uvms/dynamics.hpp"
#include "uvms/model.hpp"

namespace uvms {

/// Spatial velocity and acceleration of the manipulator base (the vehicle body
/// frame). The acceleration carries the gravity offset: a0 = a_v - [0; g_body].
struct BaseMotion {
  SpatialMotion velocity;
  SpatialMotion acceleration;

  static BaseMotion FromVehicle(const GeneralizedState& state, double gravity);
  /// Fixed base under gravity only, `g_body` in base coordinates.
  static BaseMotion FixedBase(const Vec3& g_body);
};

/// 6 x 27 vehicle regressor. Columns 0-9: M_v nu_dot + C_v(nu) nu for unit
/// inertial lumps; 10-21: [-nu_i], [-|nu_i| nu_i]; 22-26: restoring columns.
Eigen::Matrix<double, 6, param::kVehicleCount> vehicle_regressor(
    const Vec6& nu, const Vec6& nu_dot, const Vec6& eta,
    const VehicleInertiaLayout& layout = {});

/// n x 12n manipulator regressor; zero below the block diagonal. Gear ratios
/// and kinematics come from `model`; its dynamic parameters are not used.
MatX manipulator_regressor(const UvmsModel& model, const VecX& mu, const VecX& mu_dot,
                           const VecX& mu_ddot, const BaseMotion& base);

/// 6 x 10 matrix A with I a + v x* I v = A [m, h, Ixx, Ixy, Ixz, Iyy, Iyz, Izz].
Eigen::Matrix<double, 6, 10> body_wrench_regressor(const SpatialMotion& v,
                                                   const SpatialMotion& a);

struct RegressorBlock {
  Eigen::Matrix<double, 6, param::kVehicleCount> vehicle_rows;
  MatX manipulator_rows;
  /// (6+n) x (27+12n) block-diagonal assembly.
  MatX assembled;
};

RegressorBlock system_regressor(const UvmsModel& model, const GeneralizedState& state,
                                const VehicleInertiaLayout& layout = {});

}  // namespace uvms
