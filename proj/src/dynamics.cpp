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

#include "uvms/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace uvms {

GeneralizedState GeneralizedState::Zero(int num_joints) {
  GeneralizedState s;
  s.mu = VecX::Zero(num_joints);
  s.mu_dot = VecX::Zero(num_joints);
  s.mu_ddot = VecX::Zero(num_joints);
  return s;
}

VecX GeneralizedState::velocity() const {
  VecX v(6 + mu_dot.size());
  v << nu, mu_dot;
  return v;
}

VecX GeneralizedState::acceleration() const {
  VecX a(6 + mu_ddot.size());
  a << nu_dot, mu_ddot;
  return a;
}

void GeneralizedState::set_acceleration(const VecX& acc) {
  nu_dot = acc.head<6>();
  mu_ddot = acc.tail(acc.size() - 6);
}

void GeneralizedState::validate(int num_joints) const {
  if (mu.size() != num_joints || mu_dot.size() != num_joints || mu_ddot.size() != num_joints) {
    throw StateError("state has " + std::to_string(mu.size()) + " joints, model has " +
                     std::to_string(num_joints));
  }
  if (!eta.allFinite() || !nu.allFinite() || !nu_dot.allFinite() || !mu.allFinite() ||
      !mu_dot.allFinite() || !mu_ddot.allFinite()) {
    throw StateError("state contains non-finite entries");
  }
  if (std::abs(eta[4]) >= 0.5 * std::numbers::pi) {
    throw StateError("pitch at the Euler-angle singularity (|pitch| >= pi/2)");
  }
}

GeneralizedForce GeneralizedForce::FromStacked(const VecX& tau) {
  return {tau.head<6>(), tau.tail(tau.size() - 6)};
}

VecX GeneralizedForce::stacked() const {
  VecX t(6 + tau_m.size());
  t << tau_v, tau_m;
  return t;
}

Mat3 body_to_world(const Vec6& eta) { return rpy_rotation(eta[3], eta[4], eta[5]); }

Mat6 euler_kinematics(const Vec6& eta) {
  const double phi = eta[3];
  const double theta = eta[4];
  const double ct = std::cos(theta);
  if (std::abs(theta) >= 0.5 * std::numbers::pi || std::abs(ct) < 1e-12) {
    throw StateError("pitch at the Euler-angle singularity (|pitch| >= pi/2)");
  }
  const double sp = std::sin(phi), cp = std::cos(phi), tt = std::tan(theta);
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = body_to_world(eta);
  j.bottomRightCorner<3, 3>() << 1.0, sp * tt, cp * tt,
                                 0.0, cp, -sp,
                                 0.0, sp / ct, cp / ct;
  return j;
}

namespace {

/// Drag wrench acting on a body (Fossen-sign coefficients), spatial ordering.
SpatialForce drag_wrench(const LinkHydrodynamics& h, const SpatialMotion& v) {
  const Vec6 nu = swap_halves(v.vector());
  const Vec6 d = h.linear_drag.cwiseProduct(nu) +
                 h.quadratic_drag.cwiseProduct(nu.cwiseAbs().cwiseProduct(nu));
  return SpatialForce::FromVector(swap_halves(d));
}

/// Hydrostatic wrench of a force `w` (body coordinates) applied at `point`.
SpatialForce point_force(const Vec3& point, const Vec3& w) {
  return {point.cross(w), w};
}

}  // namespace

InverseDynamics hydro_rnea(const UvmsModel& model, const GeneralizedState& state) {
  const int n = model.num_links();
  if (n < 1) throw ModelError("hydro_rnea needs at least one link");
  state.validate(n);

  const bool explicit_gravity = model.gravity_mode == GravityMode::kExplicitWrench;
  const Vec3 down(0.0, 0.0, 1.0);
  const Mat3 world_to_body = body_to_world(state.eta).transpose();

  // Vehicle: Fossen dynamics of the effective (rigid + added) inertia.
  const SpatialMotion v_v = SpatialMotion::FromVector(swap_halves(state.nu));
  const SpatialMotion a_v = SpatialMotion::FromVector(swap_halves(state.nu_dot));
  const VehicleDescriptor& veh = model.vehicle;
  const SpatialInertia m_v(swap_halves(veh.effective_inertia()));
  const Vec3 down_body = world_to_body * down;
  const SpatialForce hydrostatic_v =
      point_force(veh.cg, veh.weight * down_body) +
      point_force(veh.hydro.center_of_buoyancy, -veh.hydro.buoyancy * down_body);
  SpatialForce f_v = m_v.apply(a_v) + motion_cross(v_v, m_v.apply(v_v)) -
                     drag_wrench(veh.hydro, v_v) - hydrostatic_v;

  const Vec3 g_body = model.gravity * down_body;
  SpatialMotion a_base = a_v;
  if (!explicit_gravity) a_base.linear -= g_body;

  std::vector<PluckerTransform> xform(n);
  std::vector<Mat3> world_to_link(n);
  std::vector<SpatialMotion> vel(n), acc(n);
  std::vector<SpatialForce> f(n), f_rotor(n);

  // Outward pass.
  for (int i = 0; i < n; ++i) {
    const Link& link = model.links[i];
    const JointDescriptor& joint = link.joint;
    const int p = joint.parent;
    xform[i] = joint.transform(state.mu[i]);
    world_to_link[i] = xform[i].rotation() * (p == kVehicle ? world_to_body : world_to_link[p]);
    const SpatialMotion& v_par = p == kVehicle ? v_v : vel[p];
    const SpatialMotion& a_par = p == kVehicle ? a_base : acc[p];
    const SpatialMotion s = joint.subspace();
    const double qd = state.mu_dot[i];
    const double qdd = state.mu_ddot[i];

    const SpatialMotion v_in = xform[i].apply(v_par);
    const SpatialMotion a_in = xform[i].apply(a_par);
    vel[i] = v_in + s * qd;
    acc[i] = a_in + s * qdd + motion_cross(vel[i], s * qd);

    const Vec3 g_link = model.gravity * (world_to_link[i] * down);
    const SpatialMotion gravity_acc{Vec3::Zero(), g_link};
    // Physical acceleration, needed by the fluid terms in either mode.
    const SpatialMotion a_true = explicit_gravity ? acc[i] : acc[i] + gravity_acc;

    const SpatialInertia& inertia = link.inertia;
    const SpatialForce f_body = inertia.apply(acc[i]) + motion_cross(vel[i], inertia.apply(vel[i]));

    const LinkHydrodynamics& h = link.hydro;
    SpatialForce f_hydro = drag_wrench(h, vel[i]) +
                           point_force(h.center_of_buoyancy,
                                       -h.buoyancy * (world_to_link[i] * down));
    if (!h.added_mass.isZero(0.0)) {
      const SpatialInertia added(swap_halves(h.added_mass));
      f_hydro -= added.apply(a_true) + motion_cross(vel[i], added.apply(vel[i]));
    }
    if (explicit_gravity) f_hydro += inertia.apply(gravity_acc);
    f[i] = f_body - f_hydro;

    // Rotor spinning at G q_dot relative to the parent.
    const SpatialInertia& rotor = joint.rotor_inertia;
    const double g = joint.gear_ratio;
    const SpatialMotion v_r = v_in + s * (g * qd);
    const SpatialMotion a_r = a_in + s * (g * qdd) + motion_cross(v_r, s * (g * qd));
    f_rotor[i] = rotor.apply(a_r) + motion_cross(v_r, rotor.apply(v_r));
    if (explicit_gravity) f_rotor[i] -= rotor.apply(gravity_acc);
  }

  // Inward pass.
  InverseDynamics out;
  out.tau_motor = VecX::Zero(n);
  SpatialForce to_vehicle;
  for (int i = n - 1; i >= 0; --i) {
    const JointDescriptor& joint = model.links[i].joint;
    const SpatialMotion s = joint.subspace();
    const double qd = state.mu_dot[i];
    const double tau_gear = f[i].dot(s);
    const double sgn = qd > 0.0 ? 1.0 : (qd < 0.0 ? -1.0 : 0.0);
    const double tau_friction = joint.static_friction * sgn + joint.viscous_friction * qd;
    out.tau_motor[i] = tau_gear / joint.gear_ratio + f_rotor[i].dot(s) + tau_friction;
    const SpatialForce up = xform[i].apply_transpose(f[i] + f_rotor[i]);
    if (joint.parent != kVehicle) {
      f[joint.parent] += up;
    } else {
      to_vehicle += up;
    }
  }
  out.tau_v = f_v + to_vehicle;
  out.coupling = -to_vehicle;
  return out;
}

MassMatrixAndBias mass_matrix_and_bias(const UvmsModel& model, const GeneralizedState& state) {
  const int dof = model.dof();
  GeneralizedState s = state;
  s.set_acceleration(VecX::Zero(dof));
  MassMatrixAndBias out;
  out.bias = hydro_rnea(model, s).generalized().stacked();
  out.mass.resize(dof, dof);
  for (int j = 0; j < dof; ++j) {
    VecX unit = VecX::Zero(dof);
    unit[j] = 1.0;
    s.set_acceleration(unit);
    out.mass.col(j) = hydro_rnea(model, s).generalized().stacked() - out.bias;
  }
  return out;
}

VecX forward_dynamics(const UvmsModel& model, const GeneralizedState& state, const VecX& tau) {
  if (tau.size() != model.dof()) {
    throw StateError("force vector has " + std::to_string(tau.size()) + " entries, expected " +
                     std::to_string(model.dof()));
  }
  const MassMatrixAndBias mb = mass_matrix_and_bias(model, state);
  Eigen::JacobiSVD<MatX> svd(mb.mass);
  const VecX& sv = svd.singularValues();
  const double cond = sv[0] / sv[sv.size() - 1];
  if (!(cond <= 1e12)) {
    throw SingularInertiaError("generalized inertia is singular (condition number " +
                               std::to_string(cond) + ")");
  }
  return mb.mass.partialPivLu().solve(tau - mb.bias);
}

namespace {

struct Phase {
  Vec6 eta;
  Vec6 nu;
  VecX mu;
  VecX mu_dot;

  Phase axpy(double h, const Phase& d) const {
    return {eta + h * d.eta, nu + h * d.nu, mu + h * d.mu, mu_dot + h * d.mu_dot};
  }
};

GeneralizedState to_state(const Phase& x) {
  GeneralizedState s;
  s.eta = x.eta;
  s.nu = x.nu;
  s.mu = x.mu;
  s.mu_dot = x.mu_dot;
  s.nu_dot = Vec6::Zero();
  s.mu_ddot = VecX::Zero(x.mu.size());
  return s;
}

}  // namespace

Trajectory simulate(const ModelAt& model_at, const GeneralizedState& initial,
                    const Controller& controller, double dt, double duration) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
  if (!(duration >= 0.0)) throw std::invalid_argument("simulate: duration must be >= 0");
  const long steps = std::lround(duration / dt);
  Trajectory traj;
  traj.samples.reserve(static_cast<std::size_t>(steps));

  Phase x{initial.eta, initial.nu, initial.mu, initial.mu_dot};
  const auto derivative = [&](double t, const Phase& p, GeneralizedForce* applied,
                              VecX* accel) {
    const UvmsModel& model = model_at(t);
    GeneralizedState s = to_state(p);
    const GeneralizedForce tau = controller(t, s);
    const VecX a = forward_dynamics(model, s, tau.stacked());
    if (applied) *applied = tau;
    if (accel) *accel = a;
    const int n = static_cast<int>(p.mu.size());
    return Phase{euler_kinematics(p.eta) * p.nu, a.head<6>(), p.mu_dot, a.tail(n)};
  };

  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    try {
      TrajectorySample sample;
      sample.t = t;
      VecX accel;
      const Phase k1 = derivative(t, x, &sample.force, &accel);
      sample.state = to_state(x);
      sample.state.set_acceleration(accel);
      sample.coupling = hydro_rnea(model_at(t), sample.state).coupling_marine();
      traj.samples.push_back(std::move(sample));

      const Phase k2 = derivative(t + 0.5 * dt, x.axpy(0.5 * dt, k1), nullptr, nullptr);
      const Phase k3 = derivative(t + 0.5 * dt, x.axpy(0.5 * dt, k2), nullptr, nullptr);
      const Phase k4 = derivative(t + dt, x.axpy(dt, k3), nullptr, nullptr);
      x.eta += dt / 6.0 * (k1.eta + 2.0 * k2.eta + 2.0 * k3.eta + k4.eta);
      x.nu += dt / 6.0 * (k1.nu + 2.0 * k2.nu + 2.0 * k3.nu + k4.nu);
      x.mu += dt / 6.0 * (k1.mu + 2.0 * k2.mu + 2.0 * k3.mu + k4.mu);
      x.mu_dot += dt / 6.0 * (k1.mu_dot + 2.0 * k2.mu_dot + 2.0 * k3.mu_dot + k4.mu_dot);
    } catch (const StateError& e) {
      traj.truncated = true;
      traj.diagnostic = "t=" + std::to_string(t) + ": " + e.what();
      break;
    }
  }
  return traj;
}

Trajectory simulate(const UvmsModel& model, const GeneralizedState& initial,
                    const Controller& controller, double dt, double duration) {
  return simulate([&model](double) -> const UvmsModel& { return model; }, initial,
                  controller, dt, duration);
}

double mechanical_energy(const UvmsModel& model, const GeneralizedState& state) {
  const Mat3 body_rot = body_to_world(state.eta);
  const Vec3 pos = state.eta.head<3>();
  const VehicleDescriptor& veh = model.vehicle;
  double energy = 0.5 * state.nu.dot(veh.effective_inertia() * state.nu);
  energy -= veh.weight * (pos + body_rot * veh.cg).z();
  energy += veh.hydro.buoyancy * (pos + body_rot * veh.hydro.center_of_buoyancy).z();

  const int n = model.num_links();
  const SpatialMotion v_v = SpatialMotion::FromVector(swap_halves(state.nu));
  std::vector<SpatialMotion> vel(n);
  std::vector<Mat3> rot(n);
  std::vector<Vec3> origin(n);
  for (int i = 0; i < n; ++i) {
    const Link& link = model.links[i];
    const int p = link.joint.parent;
    const PluckerTransform x = link.joint.transform(state.mu[i]);
    const Mat3& rot_p = p == kVehicle ? body_rot : rot[p];
    const Vec3& origin_p = p == kVehicle ? pos : origin[p];
    rot[i] = rot_p * x.rotation().transpose();
    origin[i] = origin_p + rot_p * x.translation();
    const SpatialMotion s = link.joint.subspace();
    const SpatialMotion v_in = x.apply(p == kVehicle ? v_v : vel[p]);
    vel[i] = v_in + s * state.mu_dot[i];
    const SpatialMotion v_r = v_in + s * (link.joint.gear_ratio * state.mu_dot[i]);

    energy += 0.5 * vel[i].vector().dot(link.inertia.matrix() * vel[i].vector());
    energy += 0.5 * v_r.vector().dot(link.joint.rotor_inertia.matrix() * v_r.vector());
    const Vec6 nu_i = swap_halves(vel[i].vector());
    energy += 0.5 * nu_i.dot(link.hydro.added_mass * nu_i);

    const double g = model.gravity;
    energy -= g * (link.inertia.mass() * origin[i].z() +
                   (rot[i] * link.inertia.first_moment()).z());
    energy -= g * (link.joint.rotor_inertia.mass() * origin[i].z() +
                   (rot[i] * link.joint.rotor_inertia.first_moment()).z());
    energy += link.hydro.buoyancy * (origin[i] + rot[i] * link.hydro.center_of_buoyancy).z();
  }
  return energy;
}

}  // namespace uvms
