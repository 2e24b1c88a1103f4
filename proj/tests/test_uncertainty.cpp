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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_util.hpp"
#include "uvms/harness.hpp"
#include "uvms/regressor.hpp"
#include "uvms/uncertainty.hpp"

namespace uvms {
namespace {

using testing::Rng;

TEST(UpdateCovariance, ZeroIncrementsDecayToRidgeSeries) {
  const double alpha = 0.1;
  CovarianceState cs = CovarianceState::Zero(5, alpha);
  cs.cov_w = MatX::Identity(5, 5);
  const VecX pi = VecX::Ones(5);
  const int steps = 300;
  for (int t = 0; t < steps; ++t) cs = update_covariance(cs, VecX::Zero(5), pi);
  const double decay = std::pow(1.0 - alpha, steps);
  const double level = decay + cs.ridge * (1.0 - decay) / alpha;
  EXPECT_LT((cs.cov_w - level * MatX::Identity(5, 5)).norm(), 1e-15);
  EXPECT_EQ(cs.mean_w.norm(), 0.0);
}

TEST(UpdateCovariance, ConstantStreamHasNoVariance) {
  const double alpha = 0.05;
  CovarianceState cs = CovarianceState::Zero(4, alpha);
  const VecX pi = (VecX(4) << 2.0, -4.0, 0.5, 1e-9).finished();
  const VecX w = (VecX(4) << 0.2, 0.4, -0.05, 1e-7).finished();
  for (int t = 0; t < 2000; ++t) cs = update_covariance(cs, w, pi);
  const VecX expected = w.cwiseQuotient(parameter_scale(pi, cs.epsilon));
  EXPECT_LT((cs.mean_w - expected).norm(), 1e-12);
  EXPECT_LT((cs.cov_w - cs.ridge / alpha * MatX::Identity(4, 4)).norm(), 1e-12);
}

TEST(UpdateCovariance, GaussianIncrementsReachStationaryVariance) {
  Rng rng(71);
  const double alpha = 0.05, sigma = 0.3;
  const int dim = 75;
  CovarianceState cs = CovarianceState::Zero(dim, alpha);
  const VecX pi = VecX::Constant(dim, 2.0);
  for (int t = 0; t < static_cast<int>(10 / alpha); ++t) {
    VecX w(dim);
    for (int i = 0; i < dim; ++i) w[i] = 2.0 * sigma * rng.normal();
    cs = update_covariance(cs, w, pi);
  }
  EXPECT_NEAR(cs.cov_w.diagonal().mean(), sigma * sigma, 0.2 * sigma * sigma);
}

TEST(UpdateCovariance, StaysSymmetricPsd) {
  Rng rng(72);
  CovarianceState cs = CovarianceState::Zero(8, 0.2);
  for (int t = 0; t < 500; ++t) {
    cs = update_covariance(cs, rng.vec(8, std::exp(rng.uniform(-5, 2))), rng.vec(8, 3.0));
    ASSERT_EQ((cs.cov_w - cs.cov_w.transpose()).norm(), 0.0);
    ASSERT_GE(min_eigenvalue(cs.cov_w), 0.0);
  }
}

TEST(UpdateCovariance, PureFoldOverIdenticalIncrements) {
  Rng rng(73);
  std::vector<VecX> stream(30, rng.vec(6));
  const VecX pi = rng.vec(6, 4.0);
  const auto fold = [&](const std::vector<VecX>& s) {
    CovarianceState cs = CovarianceState::Zero(6, 0.1);
    for (const VecX& w : s) cs = update_covariance(cs, w, pi);
    return param_covariance(cs, pi);
  };
  const MatX a = fold(stream);
  std::reverse(stream.begin(), stream.end());
  EXPECT_EQ((fold(stream) - a).norm(), 0.0);
  EXPECT_EQ((fold(stream) - a).norm(), 0.0);
}

TEST(ParamCovariance, MemoryFactor) {
  EXPECT_DOUBLE_EQ(memory_factor(0.04), 49.0);
  EXPECT_DOUBLE_EQ(memory_factor(1.0), 1.0);
}

TEST(ParamCovariance, ScalesWithSquaredParameter) {
  CovarianceState cs = CovarianceState::Zero(3, 0.5);
  cs.cov_w = MatX::Identity(3, 3) * 0.01;
  const VecX pi = (VecX(3) << 1.0, -2.0, 3.0).finished();
  const MatX base = param_covariance(cs, pi);
  EXPECT_NEAR(base(1, 1), 3.0 * 0.01 * 4.0, 1e-15);
  const MatX scaled = param_covariance(cs, 10.0 * pi);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(scaled(i, i), 100.0 * base(i, i), 1e-12);
}

TEST(ConfidenceInterval, DegenerateForZeroCovariance) {
  const VecX pi = (VecX(2) << 1.0, -3.0).finished();
  const ConfidenceIntervals ci = confidence_interval(pi, MatX::Zero(2, 2));
  EXPECT_EQ(ci.lo, pi);
  EXPECT_EQ(ci.hi, pi);
}

TEST(ConfidenceInterval, StandardNormalHalfWidth) {
  const ConfidenceIntervals ci = confidence_interval(VecX::Zero(1), MatX::Identity(1, 1));
  EXPECT_NEAR(ci.hi[0], 1.959964, 1e-6);
  EXPECT_NEAR(ci.lo[0], -1.959964, 1e-6);
  EXPECT_THROW(confidence_interval(VecX::Zero(1), MatX::Identity(1, 1), 1.0),
               std::invalid_argument);
}

TEST(PropagateTorque, NoiseOnlyWithoutParameterUncertainty) {
  Rng rng(74);
  const MatX y = rng.vec(40).reshaped(4, 10);
  const VecX noise = (VecX(4) << 1.0, 2.0, 3.0, 4.0).finished();
  EXPECT_EQ(propagate_torque_cov(y, MatX::Zero(10, 10), noise), MatX(noise.asDiagonal()));
}

TEST(PropagateTorque, RankOnePreserved) {
  Rng rng(75);
  const MatX y = rng.vec(40).reshaped(4, 10);
  const VecX s = rng.vec(10);
  const VecX ys = y * s;
  const MatX out = propagate_torque_cov(y, s * s.transpose(), VecX::Zero(4));
  EXPECT_LT((out - ys * ys.transpose()).norm(), 1e-12 * out.norm());
}

MatX sample_covariance(const std::vector<VecX>& xs) {
  VecX mean = VecX::Zero(xs[0].size());
  for (const VecX& x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  MatX c = MatX::Zero(mean.size(), mean.size());
  for (const VecX& x : xs) c += (x - mean) * (x - mean).transpose();
  return c / static_cast<double>(xs.size() - 1);
}

VecX draw(Rng& rng, const VecX& mean, const MatX& chol) {
  VecX z(mean.size());
  for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + chol * z;
}

TEST(PropagateTorque, MatchesMonteCarlo) {
  Rng rng(76);
  const UvmsModel model = reference_model();
  const VecX pi = lumped_parameters(model).values();
  const MatX sigma = (0.01 * parameter_scale(pi, 1e-6)).cwiseAbs2().asDiagonal();
  const MatX chol = sigma.cwiseSqrt();
  const MatX y = system_regressor(model, rng.state(4)).assembled;
  std::vector<VecX> torques;
  for (int k = 0; k < 4000; ++k) torques.push_back(y * draw(rng, pi, chol));
  const MatX lin = propagate_torque_cov(y, sigma, VecX::Zero(10));
  EXPECT_LT((sample_covariance(torques) - lin).norm(), 0.15 * lin.norm());
}

GeneralizedState moderate_state(Rng& rng) {
  GeneralizedState s = rng.state(4);
  s.nu *= 0.5;
  return s;
}

TEST(PropagateAccel, ZeroCovarianceGivesZero) {
  Rng rng(77);
  const UvmsModel model = reference_model();
  const VecX pi = lumped_parameters(model).values();
  const GeneralizedState s = moderate_state(rng);
  const VecX tau = rng.vec(10, 5.0);
  EXPECT_EQ(propagate_accel_cov(model, s, tau, pi, MatX::Zero(75, 75)).norm(), 0.0);
}

TEST(PropagateAccel, FiniteDifferenceConvergenceOrder) {
  Rng rng(78);
  const UvmsModel model = reference_model();
  const VecX pi = lumped_parameters(model).values();
  const GeneralizedState s = moderate_state(rng);
  const VecX tau = rng.vec(10, 5.0);
  // Large steps so truncation dominates rounding: forward error halves,
  // central error quarters when the step halves.
  const double h = 1e-2;
  const MatX ref = accel_jacobian(model, s, tau, pi, DifferenceScheme::kCentral, 1e-5);
  const auto err = [&](DifferenceScheme scheme, double step) {
    return (accel_jacobian(model, s, tau, pi, scheme, step) - ref).norm();
  };
  const double fwd_ratio = err(DifferenceScheme::kForward, h) / err(DifferenceScheme::kForward, h / 2);
  const double cen_ratio = err(DifferenceScheme::kCentral, h) / err(DifferenceScheme::kCentral, h / 2);
  EXPECT_NEAR(fwd_ratio, 2.0, 0.3);
  EXPECT_NEAR(cen_ratio, 4.0, 0.6);
  // At the production step both schemes agree to O(step).
  const MatX central = accel_jacobian(model, s, tau, pi);
  const MatX forward = accel_jacobian(model, s, tau, pi, DifferenceScheme::kForward);
  EXPECT_LT((central - forward).norm(), 1e-4 * central.norm());
}

TEST(PropagateAccel, MatchesMonteCarlo) {
  Rng rng(79);
  const UvmsModel model = reference_model();
  const VecX pi = lumped_parameters(model).values();
  const MatX sigma = (0.01 * parameter_scale(pi, 1e-6)).cwiseAbs2().asDiagonal();
  const MatX chol = sigma.cwiseSqrt();
  const GeneralizedState s = moderate_state(rng);
  const VecX tau = rng.vec(10, 5.0);
  std::vector<VecX> acc;
  for (int k = 0; k < 3000; ++k) {
    const UvmsModel m = with_parameters(model, ParameterVector(draw(rng, pi, chol)));
    acc.push_back(forward_dynamics(m, s, tau));
  }
  const MatX lin = propagate_accel_cov(model, s, tau, pi, sigma);
  EXPECT_LT((sample_covariance(acc) - lin).norm(), 0.2 * lin.norm());
}

TEST(PropagateAccel, SingularStencilThrows) {
  const UvmsModel model = reference_model();
  VecX pi = VecX::Zero(75);
  EXPECT_THROW(propagate_accel_cov(model, GeneralizedState::Zero(4), VecX::Zero(10), pi,
                                   MatX::Identity(75, 75)),
               SingularInertiaError);
}

TEST(ResidualWindow, TrailingVariance) {
  ResidualWindow win(0.99);
  EXPECT_EQ(win.variance(2).norm(), 0.0);
  for (int k = 0; k <= 100; ++k) {
    const double v = (k % 2 == 0) ? 1.0 : -1.0;
    win.push(0.02 * k, (VecX(2) << v, 3.0).finished());
  }
  EXPECT_EQ(win.size(), 50);
  EXPECT_NEAR(win.variance(2)[0], 50.0 / 49.0, 1e-12);
  EXPECT_NEAR(win.variance(2)[1], 0.0, 1e-24);
}

}  // namespace
}  // namespace uvms
