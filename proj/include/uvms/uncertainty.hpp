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

// Parameter uncertainty from the spread of MHE increments, and its
// propagation to predicted torques and accelerations.

#include <deque>

#include "uvms/dynamics.hpp"
#include "uvms/model.hpp"

namespace uvms {

/// Exponentially weighted statistics of the normalized increments
/// w~ = w / s, s = max(|pi_prev|, epsilon).
struct CovarianceState {
  VecX mean_w;
  MatX cov_w;
  double alpha = 0.05;
  double epsilon = 1e-6;
  double ridge = 1e-9;

  static CovarianceState Zero(int dimension, double alpha);
};

/// s = max(|pi|, epsilon) elementwise.
VecX parameter_scale(const VecX& pi, double epsilon);

/// One step of the recursion
///   mean_t = (1 - a) mean_{t-1} + a w~
///   cov_t  = (1 - a) cov_{t-1} + a (w~ - mean_{t-1})(w~ - mean_t)^T + ridge I.
CovarianceState update_covariance(const CovarianceState& cs, const VecX& w, const VecX& pi_prev);

/// L = 2 / alpha - 1.
double memory_factor(double alpha);

/// L S cov_w S with S = diag(parameter_scale(pi_prev)).
MatX param_covariance(const CovarianceState& cs, const VecX& pi_prev);

/// Two-sided standard normal quantile, e.g. 1.959964 for level 0.95.
double normal_quantile(double level);

struct ConfidenceIntervals {
  VecX lo;
  VecX hi;
};

/// pi_i -/+ z(level) sqrt(sigma_ii). Throws std::invalid_argument for a level
/// outside (0, 1).
ConfidenceIntervals confidence_interval(const VecX& pi, const MatX& sigma, double level = 0.95);

/// Y sigma_pi Y^T + diag(noise_variance).
MatX propagate_torque_cov(const MatX& y, const MatX& sigma_pi, const VecX& noise_variance);

enum class DifferenceScheme { kCentral, kForward };

/// d zeta_ddot / d pi of forward dynamics on with_parameters(skeleton, pi),
/// with per-parameter step step_scale * max(|pi_i|, epsilon). Throws
/// SingularInertiaError when a stencil point has a singular inertia.
MatX accel_jacobian(const UvmsModel& skeleton, const GeneralizedState& state, const VecX& tau,
                    const VecX& pi, DifferenceScheme scheme = DifferenceScheme::kCentral,
                    double step_scale = 1e-6, double epsilon = 1e-6);

/// J sigma_pi J^T with J = accel_jacobian(...).
MatX propagate_accel_cov(const UvmsModel& skeleton, const GeneralizedState& state,
                         const VecX& tau, const VecX& pi, const MatX& sigma_pi);

/// Per-channel residual variance over a trailing time window.
class ResidualWindow {
 public:
  explicit ResidualWindow(double span = 5.0) : span_(span) {}
  void push(double t, const VecX& residual);
  /// Zero vector of `channels` entries until at least two samples arrived.
  VecX variance(int channels) const;
  int size() const { return static_cast<int>(samples_.size()); }

 private:
  double span_;
  std::deque<std::pair<double, VecX>> samples_;
};

}  // namespace uvms
