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

#include "test_util.hpp"
#include "uvms/harness.hpp"
#include "uvms/model.hpp"

namespace uvms {
namespace {

using testing::Rng;

using Block12 = Eigen::Matrix<double, 12, 1>;
using Lumps10 = Eigen::Matrix<double, 10, 1>;

TEST(Layout, ReferenceArmHasSeventyFiveParameters) {
  EXPECT_EQ(param::count(4), 75);
  EXPECT_EQ(ParameterVector(4).size(), 75);
  EXPECT_EQ(reference_model().num_parameters(), 75);
}

TEST(Layout, VehiclePartitionIsTenTwelveFive) {
  EXPECT_EQ(param::kDragLinear - param::kVehicleInertia, 10);
  EXPECT_EQ(param::kRestoring - param::kDragLinear, 12);
  EXPECT_EQ(param::kVehicleCount - param::kRestoring, 5);
}

TEST(Layout, RejectsBadLength) {
  EXPECT_THROW(ParameterVector(VecX::Zero(74)), LayoutError);
  EXPECT_THROW(ParameterVector(VecX::Zero(20)), LayoutError);
  EXPECT_NO_THROW(ParameterVector(VecX::Zero(39)));
}

TEST(Layout, ParameterNames) {
  EXPECT_EQ(param::name(0, 4), "vehicle.M_surge");
  EXPECT_EQ(param::name(6, 4), "vehicle.M_surge_pitch");
  EXPECT_EQ(param::name(22, 4), "vehicle.W");
  EXPECT_EQ(param::name(27, 4), "link1.m");
  EXPECT_EQ(param::name(74, 4), "link4.fs");
}

TEST(PackUnpack, ZeroVectorGivesZeroFields) {
  const ParameterView view = unpack(ParameterVector(4));
  for (double x : view.vehicle.inertia) EXPECT_EQ(x, 0.0);
  EXPECT_TRUE(view.vehicle.drag_linear.isZero(0.0));
  for (const LinkBlock& b : view.links) {
    EXPECT_EQ(b.mass, 0.0);
    EXPECT_TRUE(b.first_moment.isZero(0.0));
  }
}

TEST(PackUnpack, RoundTripIsBitExact) {
  Rng rng(21);
  for (int k = 0; k < 20; ++k) {
    const ParameterVector pi(rng.vec(75, 10.0));
    const ParameterView view = unpack(pi);
    const ParameterVector back = pack(view.vehicle, view.links);
    EXPECT_EQ(back.values(), pi.values());
  }
}

TEST(PackUnpack, IndexLayout) {
  ParameterVector pi(4);
  for (int i = 0; i < 75; ++i) pi[i] = i;
  const ParameterView v = unpack(pi);
  EXPECT_EQ(v.vehicle.inertia[9], 9.0);
  EXPECT_EQ(v.vehicle.drag_linear[0], 10.0);
  EXPECT_EQ(v.vehicle.drag_quadratic[5], 21.0);
  EXPECT_EQ(v.vehicle.restoring[0], 22.0);
  EXPECT_EQ(v.links[1].mass, 39.0);
  EXPECT_EQ(v.links[1].first_moment.z(), 42.0);
  EXPECT_EQ(v.links[1].inertia[5], 48.0);
  EXPECT_EQ(v.links[3].coulomb, 74.0);
}

TEST(VehicleInertia, UnitLumpsGiveIdentity) {
  Lumps10 l = Lumps10::Zero();
  l.head<6>().setOnes();
  EXPECT_EQ(build_vehicle_inertia(l), Mat6::Identity());
}

TEST(VehicleInertia, CouplingPlacement) {
  Lumps10 l = Lumps10::Zero();
  l[6] = 0.3;
  const Mat6 m = build_vehicle_inertia(l);
  EXPECT_EQ(m(0, 4), 0.3);
  EXPECT_EQ(m(4, 0), 0.3);
  EXPECT_EQ(m.cwiseAbs().sum(), 0.6);
  l.setZero();
  l[7] = 1.0;
  l[8] = 2.0;
  l[9] = 3.0;
  const Mat6 n = build_vehicle_inertia(l);
  EXPECT_EQ(n(1, 3), 1.0);
  EXPECT_EQ(n(5, 1), 2.0);
  EXPECT_EQ(n(4, 2), 3.0);
}

TEST(VehicleInertia, SymmetricAndLinear) {
  Rng rng(22);
  for (int k = 0; k < 20; ++k) {
    const Lumps10 a = rng.vec(10), b = rng.vec(10);
    const Mat6 m = build_vehicle_inertia(a);
    EXPECT_EQ(m, m.transpose());
    const Mat6 sum = build_vehicle_inertia(2.0 * a - 3.0 * b);
    EXPECT_LT((sum - (2.0 * m - 3.0 * build_vehicle_inertia(b))).norm(), 1e-12);
  }
}

TEST(VehicleInertia, AlternateLayout) {
  VehicleInertiaLayout layout;
  layout.couplings[0] = {0, 2};
  Lumps10 l = Lumps10::Zero();
  l[6] = 1.5;
  const Mat6 m = build_vehicle_inertia(l, layout);
  EXPECT_EQ(m(0, 2), 1.5);
  EXPECT_EQ(m(0, 4), 0.0);
}

TEST(PseudoInertia, PointMass) {
  LinkBlock b;
  b.mass = 2.0;
  const Mat4 j = build_pseudo_inertia(b);
  Mat4 expected = Mat4::Zero();
  expected(3, 3) = 2.0;
  EXPECT_EQ(j, expected);
  EXPECT_GE(min_eigenvalue(j), 0.0);
}

TEST(PseudoInertia, UnitSphere) {
  LinkBlock b;
  b.mass = 1.0;
  b.inertia = {0.4, 0.0, 0.0, 0.4, 0.0, 0.4};
  const Mat4 j = build_pseudo_inertia(b);
  EXPECT_LT((j - Eigen::Vector4d(0.2, 0.2, 0.2, 1.0).asDiagonal().toDenseMatrix()).norm(), 1e-15);
  EXPECT_GT(min_eigenvalue(j), 0.0);
}

TEST(PseudoInertia, NegatedMassIsInfeasible) {
  LinkBlock b;
  b.mass = -1.0;
  b.inertia = {0.4, 0.0, 0.0, 0.4, 0.0, 0.4};
  EXPECT_LT(min_eigenvalue(build_pseudo_inertia(b)), 0.0);
}

TEST(PseudoInertia, LinearInBlock) {
  Rng rng(23);
  for (int k = 0; k < 20; ++k) {
    const Block12 a = rng.vec(12), b = rng.vec(12);
    const Mat4 lhs = build_pseudo_inertia(Block12(0.5 * a + 4.0 * b));
    const Mat4 rhs = 0.5 * build_pseudo_inertia(a) + 4.0 * build_pseudo_inertia(b);
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
  }
}

TEST(PseudoInertia, ReferenceLinksAreRealizable) {
  const ParameterVector pi = lumped_parameters(reference_model());
  for (int j = 0; j < 4; ++j) {
    EXPECT_GT(min_eigenvalue(build_pseudo_inertia(Block12(pi.link_block(j)))), 0.0) << j;
  }
}

TEST(Feasibility, ReferenceParametersAreFeasible) {
  const UvmsModel model = reference_model();
  const ParameterVector pi = lumped_parameters(model);
  EXPECT_TRUE(feasibility_report(pi, model.bounds).empty());
}

TEST(Feasibility, NegativeCoulombOnJointTwo) {
  const UvmsModel model = reference_model();
  ParameterVector pi = lumped_parameters(model);
  pi[param::link_offset(1) + param::kCoulomb] = -0.1;
  const auto report = feasibility_report(pi, model.bounds);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, ConstraintViolation::Kind::kCoulombFriction);
  EXPECT_EQ(report[0].index, 2);
  EXPECT_NE(report[0].message.find("joint 2"), std::string::npos);
}

TEST(Feasibility, WeightAboveBound) {
  const UvmsModel model = reference_model();
  ParameterVector pi = lumped_parameters(model);
  pi[param::kWeight] = model.bounds.w_max + 1.0;
  const auto report = feasibility_report(pi, model.bounds);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_EQ(report[0].kind, ConstraintViolation::Kind::kWeightBounds);
}

TEST(Feasibility, PositiveDragAndIndefiniteInertia) {
  const UvmsModel model = reference_model();
  ParameterVector pi = lumped_parameters(model);
  pi[param::kDragQuadratic + 2] = 0.5;
  pi[3] = -1.0;
  const auto report = feasibility_report(pi, model.bounds);
  ASSERT_EQ(report.size(), 2u);
  EXPECT_EQ(report[0].kind, ConstraintViolation::Kind::kVehicleInertia);
  EXPECT_EQ(report[1].kind, ConstraintViolation::Kind::kQuadraticDamping);
}

TEST(Feasibility, EmptyReportImpliesDenseChecks) {
  Rng rng(24);
  const UvmsModel model = reference_model();
  const ParameterVector base = lumped_parameters(model);
  int feasible = 0;
  for (int k = 0; k < 200; ++k) {
    ParameterVector pi = base;
    for (int i = 0; i < 75; ++i) pi[i] *= 1.0 + 0.03 * rng.uniform();
    if (!feasibility_report(pi, model.bounds).empty()) continue;
    ++feasible;
    Eigen::SelfAdjointEigenSolver<Mat6> es(build_vehicle_inertia(pi.vehicle_inertia()));
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
    for (int j = 0; j < 4; ++j) {
      Eigen::SelfAdjointEigenSolver<Mat4> ej(build_pseudo_inertia(Block12(pi.link_block(j))));
      EXPECT_GE(ej.eigenvalues().minCoeff(), -1e-9);
      EXPECT_GE(pi[param::link_offset(j) + param::kViscous], 0.0);
    }
    EXPECT_LE(pi.values().segment<12>(param::kDragLinear).maxCoeff(), 0.0);
  }
  EXPECT_GT(feasible, 0);
}

TEST(Lumped, ProjectionRoundTrip) {
  const UvmsModel model = reference_model(true);
  EXPECT_FALSE(is_lumped(model));
  const UvmsModel lumped = lumped_model(model);
  EXPECT_TRUE(is_lumped(lumped));
  const ParameterVector a = lumped_parameters(model);
  const ParameterVector b = lumped_parameters(lumped);
  EXPECT_LT((a.values() - b.values()).norm(), 1e-12);
}

TEST(Lumped, ReferenceModelIsLumpedWithoutHydro) {
  EXPECT_TRUE(is_lumped(reference_model(false)));
}

TEST(Validate, RejectsBadJoints) {
  UvmsModel model = reference_model();
  model.links[2].joint.gear_ratio = 0.5;
  EXPECT_THROW(model.validate(), ModelError);
  model = reference_model();
  model.links[1].joint.parent = 3;
  EXPECT_THROW(model.validate(), ModelError);
  model = reference_model();
  model.vehicle.weight = 0.0;
  EXPECT_THROW(model.validate(), ModelError);
}

}  // namespace
}  // namespace uvms
