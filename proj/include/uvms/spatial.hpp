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

// 6-D spatial vector algebra. Angular components precede linear components in
// every spatial quantity (motions, forces, inertias, transforms).

#include <Eigen/Dense>

namespace uvms {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Cross-product matrix: skew(a) * b == a.cross(b).
Mat3 skew(const Vec3& a);

struct SpatialForce;

struct SpatialMotion {
  Vec3 angular = Vec3::Zero();
  Vec3 linear = Vec3::Zero();

  static SpatialMotion Zero() { return {}; }
  static SpatialMotion FromVector(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
  Vec6 vector() const {
    Vec6 v;
    v << angular, linear;
    return v;
  }

  SpatialMotion operator+(const SpatialMotion& o) const {
    return {angular + o.angular, linear + o.linear};
  }
  SpatialMotion operator-(const SpatialMotion& o) const {
    return {angular - o.angular, linear - o.linear};
  }
  SpatialMotion operator*(double s) const { return {angular * s, linear * s}; }
  SpatialMotion& operator+=(const SpatialMotion& o) {
    angular += o.angular;
    linear += o.linear;
    return *this;
  }
};

struct SpatialForce {
  Vec3 moment = Vec3::Zero();
  Vec3 force = Vec3::Zero();

  static SpatialForce Zero() { return {}; }
  static SpatialForce FromVector(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
  Vec6 vector() const {
    Vec6 v;
    v << moment, force;
    return v;
  }

  SpatialForce operator+(const SpatialForce& o) const {
    return {moment + o.moment, force + o.force};
  }
  SpatialForce operator-(const SpatialForce& o) const {
    return {moment - o.moment, force - o.force};
  }
  SpatialForce operator-() const { return {-moment, -force}; }
  SpatialForce operator*(double s) const { return {moment * s, force * s}; }
  SpatialForce& operator+=(const SpatialForce& o) {
    moment += o.moment;
    force += o.force;
    return *this;
  }
  SpatialForce& operator-=(const SpatialForce& o) {
    moment -= o.moment;
    force -= o.force;
    return *this;
  }

  /// Power pairing f . v.
  double dot(const SpatialMotion& v) const {
    return moment.dot(v.angular) + force.dot(v.linear);
  }
};

/// Coordinate transform from frame A to frame B, stored as (E, r): E rotates
/// A-coordinates into B-coordinates and r is the origin of B expressed in A.
class PluckerTransform {
 public:
  PluckerTransform() = default;
  /// Throws std::invalid_argument unless `rotation` is proper orthonormal
  /// within 1e-10.
  PluckerTransform(const Mat3& rotation, const Vec3& translation);

  static PluckerTransform Identity() { return {}; }
  static PluckerTransform Rotation(const Mat3& rotation) {
    return {rotation, Vec3::Zero()};
  }
  static PluckerTransform Translation(const Vec3& r) {
    return {Mat3::Identity(), r};
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  PluckerTransform inverse() const;

  SpatialMotion apply(const SpatialMotion& v) const;
  SpatialForce apply(const SpatialForce& f) const;
  /// Maps a B-frame force back to A coordinates (X^T f, the force dual of the
  /// inverse transform).
  SpatialForce apply_transpose(const SpatialForce& f) const;
  SpatialMotion apply_inverse(const SpatialMotion& v) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

/// outer * inner: coordinates pass through `inner` first.
PluckerTransform compose(const PluckerTransform& outer,
                         const PluckerTransform& inner);

/// Spatial cross product v x m (motion on motion).
SpatialMotion motion_cross(const SpatialMotion& v, const SpatialMotion& m);
/// Force dual v x* f.
SpatialForce motion_cross(const SpatialMotion& v, const SpatialForce& f);

/// 6x6 symmetric inertia mapping motions to forces. Rigid-body instances are
/// PSD; added-mass instances only need to be symmetric.
class SpatialInertia {
 public:
  SpatialInertia() : matrix_(Mat6::Zero()) {}
  /// Throws std::invalid_argument if `m` is not symmetric within 1e-10.
  explicit SpatialInertia(const Mat6& m);

  static SpatialInertia Zero() { return {}; }
  /// Rigid body from mass, centre of mass and rotational inertia about the COM.
  static SpatialInertia FromMassComInertia(double mass, const Vec3& com,
                                           const Mat3& inertia_com);
  /// Linear-in-parameter form: mass, first moment h = m*c and rotational
  /// inertia about the frame origin.
  static SpatialInertia FromParameters(double mass, const Vec3& first_moment,
                                       const Mat3& inertia_origin);

  const Mat6& matrix() const { return matrix_; }
  double mass() const { return matrix_(3, 3); }
  Vec3 first_moment() const;
  Mat3 rotational_inertia() const { return matrix_.topLeftCorner<3, 3>(); }

  SpatialForce apply(const SpatialMotion& v) const {
    return SpatialForce::FromVector(matrix_ * v.vector());
  }
  SpatialInertia operator+(const SpatialInertia& o) const {
    return SpatialInertia(Mat6(matrix_ + o.matrix_));
  }

 private:
  Mat6 matrix_;
};

/// Rotation matrix for a right-handed rotation of `angle` about unit `axis`.
Mat3 axis_angle(const Vec3& axis, double angle);
/// Body-to-world rotation for roll-pitch-yaw (ZYX convention).
Mat3 rpy_rotation(double roll, double pitch, double yaw);

}  // namespace uvms
