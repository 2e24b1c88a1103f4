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

#include "uvms/spatial.hpp"

#include <cmath>
#include <stdexcept>

namespace uvms {

Mat3 skew(const Vec3& a) {
  Mat3 m;
  m << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return m;
}

PluckerTransform::PluckerTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double orth =
      (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(orth <= 1e-10) || !(std::abs(rotation.determinant() - 1.0) <= 1e-10)) {
    throw std::invalid_argument("PluckerTransform: rotation is not proper orthonormal");
  }
  if (!translation.allFinite()) {
    throw std::invalid_argument("PluckerTransform: non-finite translation");
  }
}

PluckerTransform PluckerTransform::inverse() const {
  PluckerTransform inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(rotation_ * translation_);
  return inv;
}

SpatialMotion PluckerTransform::apply(const SpatialMotion& v) const {
  return {rotation_ * v.angular,
          rotation_ * (v.linear - translation_.cross(v.angular))};
}

SpatialForce PluckerTransform::apply(const SpatialForce& f) const {
  return {rotation_ * (f.moment - translation_.cross(f.force)),
          rotation_ * f.force};
}

SpatialForce PluckerTransform::apply_transpose(const SpatialForce& f) const {
  const Vec3 force = rotation_.transpose() * f.force;
  return {rotation_.transpose() * f.moment + translation_.cross(force), force};
}

SpatialMotion PluckerTransform::apply_inverse(const SpatialMotion& v) const {
  const Vec3 angular = rotation_.transpose() * v.angular;
  return {angular, rotation_.transpose() * v.linear + translation_.cross(angular)};
}

PluckerTransform compose(const PluckerTransform& outer,
                         const PluckerTransform& inner) {
  return PluckerTransform(
      outer.rotation() * inner.rotation(),
      inner.translation() + inner.rotation().transpose() * outer.translation());
}

SpatialMotion motion_cross(const SpatialMotion& v, const SpatialMotion& m) {
  return {v.angular.cross(m.angular),
          v.angular.cross(m.linear) + v.linear.cross(m.angular)};
}

SpatialForce motion_cross(const SpatialMotion& v, const SpatialForce& f) {
  return {v.angular.cross(f.moment) + v.linear.cross(f.force),
          v.angular.cross(f.force)};
}

SpatialInertia::SpatialInertia(const Mat6& m) : matrix_(m) {
  if (!((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-10)) {
    throw std::invalid_argument("SpatialInertia: matrix is not symmetric");
  }
  matrix_ = 0.5 * (m + m.transpose());
}

SpatialInertia SpatialInertia::FromParameters(double mass, const Vec3& first_moment,
                                              const Mat3& inertia_origin) {
  Mat6 m;
  m.topLeftCorner<3, 3>() = inertia_origin;
  m.topRightCorner<3, 3>() = skew(first_moment);
  m.bottomLeftCorner<3, 3>() = skew(first_moment).transpose();
  m.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return SpatialInertia(m);
}

SpatialInertia SpatialInertia::FromMassComInertia(double mass, const Vec3& com,
                                                  const Mat3& inertia_com) {
  const Mat3 c = skew(com);
  return FromParameters(mass, mass * com, inertia_com + mass * c * c.transpose());
}

Vec3 SpatialInertia::first_moment() const {
  const Mat3 s = matrix_.topRightCorner<3, 3>();
  return {s(2, 1), s(0, 2), s(1, 0)};
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 rpy_rotation(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

}  // namespace uvms
