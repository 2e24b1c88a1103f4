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

#include "uvms/model.hpp"

#include <cmath>
#include <sstream>

namespace uvms {

Mat6 swap_halves(const Mat6& m) {
  Mat6 out;
  out.topLeftCorner<3, 3>() = m.bottomRightCorner<3, 3>();
  out.topRightCorner<3, 3>() = m.bottomLeftCorner<3, 3>();
  out.bottomLeftCorner<3, 3>() = m.topRightCorner<3, 3>();
  out.bottomRightCorner<3, 3>() = m.topLeftCorner<3, 3>();
  return out;
}

PluckerTransform JointDescriptor::transform(double q) const {
  PluckerTransform joint;
  if (revolute()) {
    joint = PluckerTransform::Rotation(axis_angle(axis.head<3>(), q).transpose());
  } else {
    joint = PluckerTransform::Translation(axis.tail<3>() * q);
  }
  return compose(joint, placement);
}

bool LinkHydrodynamics::is_zero() const {
  return added_mass.isZero(0.0) && linear_drag.isZero(0.0) &&
         quadratic_drag.isZero(0.0) && buoyancy == 0.0;
}

Mat6 VehicleDescriptor::effective_inertia() const {
  return swap_halves(rigid_inertia.matrix()) + hydro.added_mass;
}

int UvmsModel::num_parameters() const { return param::count(num_links()); }

namespace {

void check_hydro(const LinkHydrodynamics& h, const std::string& who) {
  if (!((h.added_mass - h.added_mass.transpose()).cwiseAbs().maxCoeff() <= 1e-10)) {
    throw ModelError(who + ": added mass is not symmetric");
  }
  if ((h.linear_drag.array() > 0.0).any() || (h.quadratic_drag.array() > 0.0).any()) {
    throw ModelError(who + ": drag coefficients must be <= 0 (Fossen sign)");
  }
  if (!h.added_mass.allFinite() || !std::isfinite(h.buoyancy) ||
      !h.center_of_buoyancy.allFinite()) {
    throw ModelError(who + ": non-finite hydrodynamic data");
  }
}

}  // namespace

void UvmsModel::validate() const {
  if (!(vehicle.weight > 0.0)) throw ModelError("vehicle: weight must be > 0");
  check_hydro(vehicle.hydro, "vehicle");
  if (!(bounds.w_min <= bounds.w_max)) throw ModelError("bounds: w_min > w_max");
  if (!std::isfinite(gravity)) throw ModelError("gravity must be finite");
  for (int i = 0; i < num_links(); ++i) {
    const Link& link = links[i];
    const std::string who = "link " + std::to_string(i + 1);
    const JointDescriptor& j = link.joint;
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) throw ModelError(who + ": joint axis must be a unit vector");
    const bool ang = j.axis.head<3>().squaredNorm() > 0.0;
    const bool lin = j.axis.tail<3>().squaredNorm() > 0.0;
    if (ang && lin) throw ModelError(who + ": joint axis must be purely revolute or prismatic");
    if (j.parent != kVehicle && (j.parent < 0 || j.parent >= i)) {
      throw ModelError(who + ": parent must precede the link");
    }
    if (!(j.gear_ratio >= 1.0)) throw ModelError(who + ": gear ratio must be >= 1");
    if (!(j.static_friction >= 0.0) || !(j.viscous_friction >= 0.0)) {
      throw ModelError(who + ": friction coefficients must be >= 0");
    }
    check_hydro(link.hydro, who);
  }
}

// ---------------------------------------------------------------------------

namespace param {

std::string name(int index, int num_links) {
  static const char* const kDof[] = {"surge", "sway", "heave", "roll", "pitch", "yaw"};
  static const char* const kLink[] = {"m", "mlx", "mly", "mlz", "Ixx", "Ixy",
                                      "Ixz", "Iyy", "Iyz", "Izz", "fv", "fs"};
  static const char* const kRestore[] = {"W", "B", "xgW-xbB", "ygW-ybB", "zgW-zbB"};
  std::ostringstream os;
  if (index < 0 || index >= count(num_links)) return "?";
  if (index < 6) {
    os << "vehicle.M_" << kDof[index];
  } else if (index < 10) {
    const VehicleInertiaLayout layout;
    const auto& c = layout.couplings[index - 6];
    os << "vehicle.M_" << kDof[c[0]] << "_" << kDof[c[1]];
  } else if (index < kDragQuadratic) {
    os << "vehicle.D_lin_" << kDof[index - kDragLinear];
  } else if (index < kRestoring) {
    os << "vehicle.D_quad_" << kDof[index - kDragQuadratic];
  } else if (index < kVehicleCount) {
    os << "vehicle." << kRestore[index - kRestoring];
  } else {
    const int j = (index - kVehicleCount) / kLinkBlock;
    os << "link" << (j + 1) << "." << kLink[(index - kVehicleCount) % kLinkBlock];
  }
  return os.str();
}

}  // namespace param

ParameterVector::ParameterVector(int num_links)
    : values_(VecX::Zero(param::count(num_links))), num_links_(num_links) {
  if (num_links < 0) throw LayoutError("negative link count");
}

ParameterVector::ParameterVector(VecX values) : values_(std::move(values)) {
  const auto size = values_.size();
  if (size < param::kVehicleCount || (size - param::kVehicleCount) % param::kLinkBlock != 0) {
    throw LayoutError("parameter vector length " + std::to_string(size) +
                      " is not 27 + 12 n");
  }
  num_links_ = static_cast<int>((size - param::kVehicleCount) / param::kLinkBlock);
}

Mat3 LinkBlock::inertia_matrix() const {
  Mat3 m;
  m << inertia[0], inertia[1], inertia[2],
       inertia[1], inertia[3], inertia[4],
       inertia[2], inertia[4], inertia[5];
  return m;
}

ParameterVector pack(const VehicleLumps& vehicle, const std::vector<LinkBlock>& links) {
  ParameterVector pi(static_cast<int>(links.size()));
  VecX& v = pi.values();
  for (int i = 0; i < 10; ++i) v[param::kVehicleInertia + i] = vehicle.inertia[i];
  v.segment<6>(param::kDragLinear) = vehicle.drag_linear;
  v.segment<6>(param::kDragQuadratic) = vehicle.drag_quadratic;
  for (int i = 0; i < 5; ++i) v[param::kRestoring + i] = vehicle.restoring[i];
  for (std::size_t j = 0; j < links.size(); ++j) {
    const int o = param::link_offset(static_cast<int>(j));
    const LinkBlock& b = links[j];
    v[o + param::kMass] = b.mass;
    v.segment<3>(o + param::kFirstMomentX) = b.first_moment;
    for (int k = 0; k < 6; ++k) v[o + param::kIxx + k] = b.inertia[k];
    v[o + param::kViscous] = b.viscous;
    v[o + param::kCoulomb] = b.coulomb;
  }
  return pi;
}

ParameterView unpack(const ParameterVector& pi) {
  const VecX& v = pi.values();
  ParameterView view;
  for (int i = 0; i < 10; ++i) view.vehicle.inertia[i] = v[param::kVehicleInertia + i];
  view.vehicle.drag_linear = v.segment<6>(param::kDragLinear);
  view.vehicle.drag_quadratic = v.segment<6>(param::kDragQuadratic);
  for (int i = 0; i < 5; ++i) view.vehicle.restoring[i] = v[param::kRestoring + i];
  view.links.resize(pi.num_links());
  for (int j = 0; j < pi.num_links(); ++j) {
    const int o = param::link_offset(j);
    LinkBlock& b = view.links[j];
    b.mass = v[o + param::kMass];
    b.first_moment = v.segment<3>(o + param::kFirstMomentX);
    for (int k = 0; k < 6; ++k) b.inertia[k] = v[o + param::kIxx + k];
    b.viscous = v[o + param::kViscous];
    b.coulomb = v[o + param::kCoulomb];
  }
  return view;
}

Mat6 build_vehicle_inertia(const Eigen::Matrix<double, 10, 1>& lumps,
                           const VehicleInertiaLayout& layout) {
  Mat6 m = Mat6::Zero();
  for (int i = 0; i < 6; ++i) m(i, i) = lumps[i];
  for (int k = 0; k < 4; ++k) {
    const auto [r, c] = layout.couplings[k];
    m(r, c) = lumps[6 + k];
    m(c, r) = lumps[6 + k];
  }
  return m;
}

PseudoInertia build_pseudo_inertia(const Eigen::Matrix<double, 12, 1>& block) {
  LinkBlock b;
  b.mass = block[param::kMass];
  b.first_moment = block.segment<3>(param::kFirstMomentX);
  for (int k = 0; k < 6; ++k) b.inertia[k] = block[param::kIxx + k];
  return build_pseudo_inertia(b);
}

PseudoInertia build_pseudo_inertia(const LinkBlock& block) {
  const Mat3 inertia = block.inertia_matrix();
  PseudoInertia j;
  j.topLeftCorner<3, 3>() = 0.5 * inertia.trace() * Mat3::Identity() - inertia;
  j.topRightCorner<3, 1>() = block.first_moment;
  j.bottomLeftCorner<1, 3>() = block.first_moment.transpose();
  j(3, 3) = block.mass;
  return j;
}

double min_eigenvalue(const MatX& symmetric) {
  Eigen::SelfAdjointEigenSolver<MatX> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

std::vector<ConstraintViolation> feasibility_report(const ParameterVector& pi,
                                                    const WeightBounds& bounds,
                                                    double eigen_tolerance) {
  using Kind = ConstraintViolation::Kind;
  std::vector<ConstraintViolation> out;
  const VecX& v = pi.values();

  const double lm_v = min_eigenvalue(build_vehicle_inertia(pi.vehicle_inertia()));
  if (!(lm_v >= eigen_tolerance)) {
    out.push_back({Kind::kVehicleInertia, -1, lm_v,
                   "vehicle inertia not positive definite (min eigenvalue " +
                       std::to_string(lm_v) + ")"});
  }
  for (int d = 0; d < 6; ++d) {
    if (!(v[param::kDragLinear + d] <= 0.0)) {
      out.push_back({Kind::kLinearDamping, d, v[param::kDragLinear + d],
                     param::name(param::kDragLinear + d, pi.num_links()) + " > 0"});
    }
    if (!(v[param::kDragQuadratic + d] <= 0.0)) {
      out.push_back({Kind::kQuadraticDamping, d, v[param::kDragQuadratic + d],
                     param::name(param::kDragQuadratic + d, pi.num_links()) + " > 0"});
    }
  }
  const double w = v[param::kWeight];
  if (!(w >= bounds.w_min && w <= bounds.w_max)) {
    out.push_back({Kind::kWeightBounds, -1, w,
                   "weight " + std::to_string(w) + " outside [" +
                       std::to_string(bounds.w_min) + ", " + std::to_string(bounds.w_max) + "]"});
  }
  for (int j = 0; j < pi.num_links(); ++j) {
    const int o = param::link_offset(j);
    const std::string joint = "joint " + std::to_string(j + 1);
    const double lm = min_eigenvalue(build_pseudo_inertia(Eigen::Matrix<double, 12, 1>(pi.link_block(j))));
    if (!(lm >= eigen_tolerance)) {
      out.push_back({Kind::kPseudoInertia, j + 1, lm,
                     "link " + std::to_string(j + 1) +
                         " pseudo-inertia not positive definite (min eigenvalue " +
                         std::to_string(lm) + ")"});
    }
    if (!(v[o + param::kViscous] >= 0.0)) {
      out.push_back({Kind::kViscousFriction, j + 1, v[o + param::kViscous],
                     joint + " viscous friction < 0"});
    }
    if (!(v[o + param::kCoulomb] >= 0.0)) {
      out.push_back({Kind::kCoulombFriction, j + 1, v[o + param::kCoulomb],
                     joint + " Coulomb friction < 0"});
    }
  }
  return out;
}

std::array<double, 5> restoring_lumps(const VehicleDescriptor& vehicle) {
  const double w = vehicle.weight;
  const double b = vehicle.hydro.buoyancy;
  const Vec3 arm = vehicle.cg * w - vehicle.hydro.center_of_buoyancy * b;
  return {w, b, arm.x(), arm.y(), arm.z()};
}

ParameterVector lumped_parameters(const UvmsModel& model, const VehicleInertiaLayout& layout) {
  VehicleLumps lumps;
  const Mat6 m = model.vehicle.effective_inertia();
  for (int i = 0; i < 6; ++i) lumps.inertia[i] = m(i, i);
  for (int k = 0; k < 4; ++k) {
    const auto [r, c] = layout.couplings[k];
    lumps.inertia[6 + k] = 0.5 * (m(r, c) + m(c, r));
  }
  lumps.drag_linear = model.vehicle.hydro.linear_drag;
  lumps.drag_quadratic = model.vehicle.hydro.quadratic_drag;
  lumps.restoring = restoring_lumps(model.vehicle);

  std::vector<LinkBlock> blocks(model.links.size());
  for (std::size_t j = 0; j < model.links.size(); ++j) {
    const Link& link = model.links[j];
    LinkBlock& b = blocks[j];
    b.mass = link.inertia.mass();
    b.first_moment = link.inertia.first_moment();
    const Mat3 inertia = link.inertia.rotational_inertia();
    b.inertia = {inertia(0, 0), inertia(0, 1), inertia(0, 2),
                 inertia(1, 1), inertia(1, 2), inertia(2, 2)};
    b.viscous = link.joint.viscous_friction;
    b.coulomb = link.joint.static_friction;
  }
  return pack(lumps, blocks);
}

UvmsModel with_parameters(const UvmsModel& skeleton, const ParameterVector& pi,
                          const VehicleInertiaLayout& layout) {
  if (pi.num_links() != skeleton.num_links()) {
    throw LayoutError("parameter vector has " + std::to_string(pi.num_links()) +
                      " link blocks, model has " + std::to_string(skeleton.num_links()));
  }
  const ParameterView view = unpack(pi);
  UvmsModel model = skeleton;

  const Mat6 m = build_vehicle_inertia(pi.vehicle_inertia(), layout);
  model.vehicle.rigid_inertia = SpatialInertia(swap_halves(m));
  model.vehicle.hydro = LinkHydrodynamics{};
  model.vehicle.hydro.linear_drag = view.vehicle.drag_linear;
  model.vehicle.hydro.quadratic_drag = view.vehicle.drag_quadratic;
  const auto& r = view.vehicle.restoring;
  model.vehicle.weight = r[0];
  model.vehicle.hydro.buoyancy = r[1];
  const Vec3 arm(r[2], r[3], r[4]);
  if (r[0] != 0.0) {
    model.vehicle.cg = arm / r[0];
  } else if (arm.isZero(0.0)) {
    model.vehicle.cg.setZero();
  } else {
    throw ModelError("restoring arms are non-zero while the weight lump is zero");
  }
  model.vehicle.hydro.center_of_buoyancy.setZero();

  for (int j = 0; j < model.num_links(); ++j) {
    Link& link = model.links[j];
    const LinkBlock& b = view.links[j];
    link.inertia = b.spatial_inertia();
    link.hydro = LinkHydrodynamics{};
    link.joint.rotor_inertia = SpatialInertia::Zero();
    link.joint.viscous_friction = b.viscous;
    link.joint.static_friction = b.coulomb;
  }
  return model;
}

bool is_lumped(const UvmsModel& model, double tol, const VehicleInertiaLayout& layout) {
  for (const Link& link : model.links) {
    if (!link.hydro.is_zero()) return false;
    if (!link.joint.rotor_inertia.matrix().isZero(tol)) return false;
  }
  Mat6 m = model.vehicle.effective_inertia();
  for (int i = 0; i < 6; ++i) m(i, i) = 0.0;
  for (const auto& c : layout.couplings) {
    m(c[0], c[1]) = 0.0;
    m(c[1], c[0]) = 0.0;
  }
  return m.cwiseAbs().maxCoeff() <= tol;
}

}  // namespace uvms
