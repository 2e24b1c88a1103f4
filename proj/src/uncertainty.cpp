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

#include "uvms/uncertainty.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace uvms {

CovarianceState CovarianceState::Zero(int dimension, double alpha) {
  CovarianceState cs;
  cs.mean_w = VecX::Zero(dimension);
  cs.cov_w = MatX::Zero(dimension, dimension);
  cs.alpha = alpha;
  return cs;
}

VecX parameter_scale(const VecX& pi, double epsilon) {
  return pi.cwiseAbs().cwiseMax(epsilon);
}

CovarianceState update_covariance(const CovarianceState& cs, const VecX& w, const VecX& pi_prev) {
  CovarianceState out = cs;
  const double a = cs.alpha;
  const VecX wn = w.cwiseQuotient(parameter_scale(pi_prev, cs.epsilon));
  out.mean_w = (1.0 - a) * cs.mean_w + a * wn;
  out.cov_w = (1.0 - a) * cs.cov_w + a * (wn - cs.mean_w) * (wn - out.mean_w).transpose();
  out.cov_w.diagonal().array() += cs.ridge;
  // The outer product is (1 - a) d d^T up to rounding; keep it exactly symmetric.
  out.cov_w = 0.5 * (out.cov_w + out.cov_w.transpose()).eval();
  return out;
}

double memory_factor(double alpha) { return 2.0 / alpha - 1.0; }

MatX param_covariance(const CovarianceState& cs, const VecX& pi_prev) {
  const VecX s = parameter_scale(pi_prev, cs.epsilon);
  return memory_factor(cs.alpha) * (s.asDiagonal() * cs.cov_w * s.asDiagonal());
}

double normal_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
}

ConfidenceIntervals confidence_interval(const VecX& pi, const MatX& sigma, double level) {
  const double z = normal_quantile(level);
  const VecX half = z * sigma.diagonal().cwiseMax(0.0).cwiseSqrt();
  return {pi - half, pi + half};
}

MatX propagate_torque_cov(const MatX& y, const MatX& sigma_pi, const VecX& noise_variance) {
  MatX out = y * sigma_pi * y.transpose();
  out.diagonal() += noise_variance;
  return out;
}

MatX accel_jacobian(const UvmsModel& skeleton, const GeneralizedState& state, const VecX& tau,
                    const VecX& pi, DifferenceScheme scheme, double step_scale, double epsilon) {
  const int n = static_cast<int>(pi.size());
  const auto accel = [&](const VecX& p) {
    return forward_dynamics(with_parameters(skeleton, ParameterVector(p)), state, tau);
  };
  const VecX steps = step_scale * parameter_scale(pi, epsilon);
  VecX base;
  if (scheme == DifferenceScheme::kForward) base = accel(pi);
  MatX jac(skeleton.dof(), n);
  for (int i = 0; i < n; ++i) {
    VecX plus = pi;
    plus[i] += steps[i];
    if (scheme == DifferenceScheme::kCentral) {
      VecX minus = pi;
      minus[i] -= steps[i];
      jac.col(i) = (accel(plus) - accel(minus)) / (2.0 * steps[i]);
    } else {
      jac.col(i) = (accel(plus) - base) / steps[i];
    }
  }
  return jac;
}

MatX propagate_accel_cov(const UvmsModel& skeleton, const GeneralizedState& state,
                         const VecX& tau, const VecX& pi, const MatX& sigma_pi) {
  const MatX jac = accel_jacobian(skeleton, state, tau, pi);
  return jac * sigma_pi * jac.transpose();
}

void ResidualWindow::push(double t, const VecX& residual) {
  samples_.emplace_back(t, residual);
  while (!samples_.empty() && samples_.front().first < t - span_) samples_.pop_front();
}

VecX ResidualWindow::variance(int channels) const {
  VecX out = VecX::Zero(channels);
  if (samples_.size() < 2) return out;
  VecX mean = VecX::Zero(channels);
  for (const auto& s : samples_) mean += s.second;
  mean /= static_cast<double>(samples_.size());
  for (const auto& s : samples_) out += (s.second - mean).cwiseAbs2();
  return out / static_cast<double>(samples_.size() - 1);
}

}  // namespace uvms
