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

#include <random>

#include "uvms/dynamics.hpp"
#include "uvms/spatial.hpp"

namespace uvms::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  Vec3 vec3(double scale = 1.0) { return Vec3(uniform(), uniform(), uniform()) * scale; }
  Vec6 vec6(double scale = 1.0) {
    Vec6 v;
    for (int i = 0; i < 6; ++i) v[i] = uniform() * scale;
    return v;
  }
  VecX vec(int n, double scale = 1.0) {
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform() * scale;
    return v;
  }
  Mat3 rotation() {
    return rpy_rotation(uniform(-3.0, 3.0), uniform(-1.5, 1.5), uniform(-3.0, 3.0));
  }
  PluckerTransform transform() { return {rotation(), vec3()}; }
  SpatialMotion motion() { return SpatialMotion::FromVector(vec6()); }
  SpatialForce force() { return SpatialForce::FromVector(vec6()); }

  GeneralizedState state(int n) {
    GeneralizedState s = GeneralizedState::Zero(n);
    s.eta = vec6();
    s.eta[3] = uniform(-0.6, 0.6);
    s.eta[4] = uniform(-0.6, 0.6);
    s.eta[5] = uniform(-3.0, 3.0);
    s.nu = vec6(0.5);
    s.nu_dot = vec6(0.5);
    s.mu = vec(n, 2.0);
    s.mu_dot = vec(n, 1.0);
    s.mu_ddot = vec(n, 2.0);
    return s;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// 6x6 motion transform matrix of (E, r), built independently of the library.
inline Mat6 motion_matrix(const PluckerTransform& x) {
  const Mat3& e = x.rotation();
  const Vec3& r = x.translation();
  Mat3 rx;
  rx << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = e;
  m.bottomLeftCorner<3, 3>() = -e * rx;
  m.bottomRightCorner<3, 3>() = e;
  return m;
}

/// 6x6 motion cross-product matrix of v.
inline Mat6 cross_matrix(const SpatialMotion& v) {
  const auto sk = [](const Vec3& a) {
    Mat3 s;
    s << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
    return s;
  };
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = sk(v.angular);
  m.bottomLeftCorner<3, 3>() = sk(v.linear);
  m.bottomRightCorner<3, 3>() = sk(v.angular);
  return m;
}

inline double relative_error(const VecX& a, const VecX& b) {
  const double scale = b.norm();
  return scale > 0.0 ? (a - b).norm() / scale : a.norm();
}

}  // namespace uvms::testing
