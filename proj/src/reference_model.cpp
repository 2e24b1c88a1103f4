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

#include "uvms/harness.hpp"

namespace uvms {

namespace {

Mat3 tilted_inertia(double ixx, double iyy, double izz, double roll, double pitch, double yaw) {
  const Mat3 r = rpy_rotation(roll, pitch, yaw);
  return r * Vec3(ixx, iyy, izz).asDiagonal() * r.transpose();
}

Link make_link(const std::string& name, const Vec3& axis, const Vec3& offset, double mass,
               const Vec3& com, const Mat3& inertia_com, bool full_hydro) {
  Link link;
  link.name = name;
  link.joint.axis << axis, Vec3::Zero();
  link.joint.placement = PluckerTransform::Translation(offset);
  link.joint.gear_ratio = 1.0;
  link.joint.viscous_friction = 0.05 + 0.05 * mass;
  link.joint.static_friction = 0.02 + 0.04 * mass;
  link.inertia = SpatialInertia::FromMassComInertia(mass, com, inertia_com);
  if (full_hydro) {
    // Rotor: thin disc about the joint axis.
    const Mat3 rotor = 2e-4 * Mat3::Identity() + 4e-4 * axis * axis.transpose();
    link.joint.rotor_inertia = SpatialInertia::FromMassComInertia(0.05, Vec3::Zero(), rotor);
    LinkHydrodynamics& h = link.hydro;
    const double d = 0.4 * mass;
    h.added_mass.diagonal() << d, d, 0.5 * d, 0.02 * d, 0.02 * d, 0.01 * d;
    h.linear_drag << -0.8, -0.8, -0.4, -0.02, -0.02, -0.01;
    h.quadratic_drag << -2.0, -2.0, -1.0, -0.05, -0.05, -0.02;
    h.buoyancy = 0.7 * mass * 9.81;
    h.center_of_buoyancy = com + Vec3(0.0, 0.0, -0.01);
  }
  return link;
}

}  // namespace

UvmsModel reference_model(bool full_hydro) {
  UvmsModel model;
  model.gravity = 9.81;
  model.bounds = {100.0, 130.0};

  VehicleDescriptor& v = model.vehicle;
  const double mass = 11.5;
  const Vec3 cg(0.0, 0.0, 0.02);
  const Mat3 inertia_cg = Vec3(0.16, 0.16, 0.16).asDiagonal();
  v.rigid_inertia = SpatialInertia::FromMassComInertia(mass, cg, inertia_cg);
  v.cg = cg;
  v.weight = 112.8;
  v.hydro.buoyancy = 114.8;
  v.hydro.center_of_buoyancy.setZero();
  v.hydro.added_mass.diagonal() << 5.5, 12.7, 14.57, 0.12, 0.12, 0.12;
  v.hydro.added_mass(0, 4) = v.hydro.added_mass(4, 0) = 0.15;
  v.hydro.added_mass(1, 3) = v.hydro.added_mass(3, 1) = -0.12;
  v.hydro.added_mass(1, 5) = v.hydro.added_mass(5, 1) = 0.05;
  v.hydro.added_mass(2, 4) = v.hydro.added_mass(4, 2) = 0.04;
  v.hydro.linear_drag << -4.03, -6.22, -5.18, -0.07, -0.07, -0.07;
  v.hydro.quadratic_drag << -18.18, -21.66, -36.99, -1.55, -1.55, -1.55;

  // Arm mounted under the front of the frame, folded forward.
  model.links.push_back(make_link("shoulder_yaw", Vec3::UnitZ(), Vec3(0.20, 0.0, 0.12), 0.8,
                                  Vec3(0.01, 0.005, 0.04),
                                  tilted_inertia(2.2e-3, 2.0e-3, 1.2e-3, 0.1, -0.05, 0.2),
                                  full_hydro));
  model.links.push_back(make_link("shoulder_pitch", Vec3::UnitY(), Vec3(0.0, 0.0, 0.08), 0.6,
                                  Vec3(0.09, -0.004, 0.006),
                                  tilted_inertia(4.0e-4, 2.1e-3, 2.0e-3, -0.08, 0.12, 0.05),
                                  full_hydro));
  model.links.push_back(make_link("elbow_pitch", Vec3::UnitY(), Vec3(0.18, 0.0, 0.0), 0.5,
                                  Vec3(0.075, 0.006, -0.005),
                                  tilted_inertia(3.0e-4, 1.4e-3, 1.3e-3, 0.07, 0.1, -0.12),
                                  full_hydro));
  model.links.push_back(make_link("wrist_roll", Vec3::UnitX(), Vec3(0.15, 0.0, 0.0), 0.3,
                                  Vec3(0.04, 0.008, -0.006),
                                  tilted_inertia(2.0e-4, 5.0e-4, 4.5e-4, -0.1, 0.06, 0.09),
                                  full_hydro));
  for (int i = 1; i < 4; ++i) model.links[i].joint.parent = i - 1;
  model.validate();
  return model;
}

UvmsModel lumped_model(const UvmsModel& model) {
  return with_parameters(model, lumped_parameters(model));
}

}  // namespace uvms
