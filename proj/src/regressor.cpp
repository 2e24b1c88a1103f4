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

#include "uvms/regressor.hpp"

#include <cmath>

namespace uvms {

BaseMotion BaseMotion::FromVehicle(const GeneralizedState& state, double gravity) {
  BaseMotion base;
  base.velocity = SpatialMotion::FromVector(swap_halves(state.nu));
  base.acceleration = SpatialMotion::FromVector(swap_halves(state.nu_dot));
  const Vec3 down_body = body_to_world(state.eta).transpose() * Vec3::UnitZ();
  base.acceleration.linear -= gravity * down_body;
  return base;
}

BaseMotion BaseMotion::FixedBase(const Vec3& g_body) {
  BaseMotion base;
  base.acceleration.linear = -g_body;
  return base;
}

Eigen::Matrix<double, 6, param::kVehicleCount> vehicle_regressor(
    const Vec6& nu, const Vec6& nu_dot, const Vec6& eta, const VehicleInertiaLayout& layout) {
  Eigen::Matrix<double, 6, param::kVehicleCount> y;
  y.setZero();

  const Vec3 nu1 = nu.head<3>();
  const Vec3 nu2 = nu.tail<3>();
  for (int k = 0; k < param::kVehicleInertiaCount; ++k) {
    Eigen::Matrix<double, 10, 1> unit = Eigen::Matrix<double, 10, 1>::Zero();
    unit[k] = 1.0;
    const Mat6 m = build_vehicle_inertia(unit, layout);
    // Coriolis-centripetal term in the skew parameterization of M.
    const Vec3 p1 = m.topLeftCorner<3, 3>() * nu1 + m.topRightCorner<3, 3>() * nu2;
    const Vec3 p2 = m.bottomLeftCorner<3, 3>() * nu1 + m.bottomRightCorner<3, 3>() * nu2;
    Vec6 c;
    c << -skew(p1) * nu2, -skew(p1) * nu1 - skew(p2) * nu2;
    y.col(param::kVehicleInertia + k) = m * nu_dot + c;
  }

  for (int d = 0; d < 6; ++d) {
    y(d, param::kDragLinear + d) = -nu[d];
    y(d, param::kDragQuadratic + d) = -std::abs(nu[d]) * nu[d];
  }

  const double sphi = std::sin(eta[3]), cphi = std::cos(eta[3]);
  const double sth = std::sin(eta[4]), cth = std::cos(eta[4]);
  Vec6 w;
  w << sth, -cth * sphi, -cth * cphi, 0.0, 0.0, 0.0;
  y.col(param::kWeight) = w;
  y.col(param::kBuoyancy) = -w;
  y.col(param::kRestoring + 2) << 0.0, 0.0, 0.0, 0.0, cth * cphi, -cth * sphi;
  y.col(param::kRestoring + 3) << 0.0, 0.0, 0.0, -cth * cphi, 0.0, -sth;
  y.col(param::kRestoring + 4) << 0.0, 0.0, 0.0, cth * sphi, sth, 0.0;
  return y;
}

Eigen::Matrix<double, 6, 10> body_wrench_regressor(const SpatialMotion& v,
                                                   const SpatialMotion& a) {
  const Vec3& w = v.angular;
  const Vec3& vl = v.linear;
  const Vec3& wd = a.angular;
  const Vec3& al = a.linear;
  const auto bullet = [](const Vec3& x) {
    Eigen::Matrix<double, 3, 6> l;
    l << x.x(), x.y(), x.z(), 0.0, 0.0, 0.0,
         0.0, x.x(), 0.0, x.y(), x.z(), 0.0,
         0.0, 0.0, x.x(), 0.0, x.y(), x.z();
    return l;
  };

  Eigen::Matrix<double, 6, 10> out;
  out.setZero();
  out.block<3, 1>(3, 0) = al + w.cross(vl);
  out.block<3, 3>(0, 1) = -skew(al) - skew(w) * skew(vl) + skew(vl) * skew(w);
  out.block<3, 3>(3, 1) = skew(wd) + skew(w) * skew(w);
  out.block<3, 6>(0, 4) = bullet(wd) + skew(w) * bullet(w);
  return out;
}

MatX manipulator_regressor(const UvmsModel& model, const VecX& mu, const VecX& mu_dot,
                           const VecX& mu_ddot, const BaseMotion& base) {
  const int n = model.num_links();
  std::vector<PluckerTransform> xform(n);
  std::vector<SpatialMotion> vel(n), acc(n);
  for (int i = 0; i < n; ++i) {
    const JointDescriptor& joint = model.links[i].joint;
    const int p = joint.parent;
    xform[i] = joint.transform(mu[i]);
    const SpatialMotion s = joint.subspace();
    vel[i] = xform[i].apply(p == kVehicle ? base.velocity : vel[p]) + s * mu_dot[i];
    acc[i] = xform[i].apply(p == kVehicle ? base.acceleration : acc[p]) + s * mu_ddot[i] +
             motion_cross(vel[i], s * mu_dot[i]);
  }

  MatX y = MatX::Zero(n, param::kLinkBlock * n);
  for (int j = 0; j < n; ++j) {
    const int col = param::kLinkBlock * j;
    Eigen::Matrix<double, 6, 10> wrench = body_wrench_regressor(vel[j], acc[j]);
    // Walk from link j towards the base; row k of the chain sees link j's
    // wrench only when j lies in the subtree of k.
    for (int k = j; k != kVehicle; k = model.links[k].joint.parent) {
      const JointDescriptor& joint = model.links[k].joint;
      const Vec6 s = joint.axis;
      y.block(k, col, 1, 10) = s.transpose() * wrench / joint.gear_ratio;
      for (int c = 0; c < 10; ++c) {
        wrench.col(c) = xform[k].apply_transpose(SpatialForce::FromVector(wrench.col(c))).vector();
      }
    }
    const double qd = mu_dot[j];
    y(j, col + param::kViscous) = qd;
    y(j, col + param::kCoulomb) = qd > 0.0 ? 1.0 : (qd < 0.0 ? -1.0 : 0.0);
  }
  return y;
}

RegressorBlock system_regressor(const UvmsModel& model, const GeneralizedState& state,
                                const VehicleInertiaLayout& layout) {
  const int n = model.num_links();
  RegressorBlock out;
  out.vehicle_rows = vehicle_regressor(state.nu, state.nu_dot, state.eta, layout);
  out.manipulator_rows = manipulator_regressor(model, state.mu, state.mu_dot, state.mu_ddot,
                                               BaseMotion::FromVehicle(state, model.gravity));
  out.assembled = MatX::Zero(6 + n, param::count(n));
  out.assembled.topLeftCorner<6, param::kVehicleCount>() = out.vehicle_rows;
  out.assembled.bottomRightCorner(n, param::kLinkBlock * n) = out.manipulator_rows;
  return out;
}

}  // namespace uvms
