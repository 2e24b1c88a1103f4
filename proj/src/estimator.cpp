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

#include "uvms/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "uvms/regressor.hpp"

namespace uvms {

std::string to_string(HuberScope scope) {
  switch (scope) {
    case HuberScope::kFull: return "full";
    case HuberScope::kBlock: return "block";
    case HuberScope::kElement: return "element";
  }
  return "block";
}

HuberScope huber_scope_from_string(const std::string& text) {
  if (text == "full") return HuberScope::kFull;
  if (text == "block") return HuberScope::kBlock;
  if (text == "element") return HuberScope::kElement;
  throw ConfigError("unknown huber scope '" + text + "' (expected full, block or element)");
}

HorizonBuffer::HorizonBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("horizon capacity must be at least 1");
}

bool HorizonBuffer::push(HorizonEntry entry, std::string* diagnostic) {
  if (!entries_.empty() && !(entry.t > entries_.back().t)) {
    if (diagnostic) {
      *diagnostic = "rejected sample at t=" + std::to_string(entry.t) +
                    ": timestamp not after " + std::to_string(entries_.back().t);
    }
    return false;
  }
  entries_.push_back(std::move(entry));
  while (size() > capacity_) entries_.pop_front();
  ++total_pushed_;
  return true;
}

HorizonEntry make_entry(const UvmsModel& skeleton, double t, const GeneralizedState& state,
                        const GeneralizedForce& tau, const Vec6& tau_mv,
                        const VehicleInertiaLayout& layout) {
  HorizonEntry e;
  e.t = t;
  e.y = system_regressor(skeleton, state, layout).assembled;
  e.tau.resize(skeleton.dof());
  e.tau << tau.tau_v + tau_mv, tau.tau_m;
  e.row_weights = VecX::Ones(skeleton.dof());
  return e;
}

StageMask StageMask::All(int num_parameters, int num_rows, int stage) {
  return {stage, std::vector<bool>(num_parameters, true), std::vector<bool>(num_rows, true)};
}

namespace {

std::vector<int> true_indices(const std::vector<bool>& mask) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(mask.size()); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<int> StageMask::active_parameters() const { return true_indices(parameters); }
std::vector<int> StageMask::active_rows() const { return true_indices(rows); }

void StageSchedule::validate(int num_parameters, int num_rows) const {
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const StageWindow& w = windows[k];
    const std::string label = "stage '" + w.name + "'";
    if (!(w.t1 > w.t0)) throw ConfigError(label + " has an empty time window");
    if (k == 0 && w.t0 != 0.0) throw ConfigError("stage schedule must start at t = 0");
    if (k > 0) {
      const double prev = windows[k - 1].t1;
      if (w.t0 < prev) throw ConfigError(label + " overlaps the previous stage");
      if (w.t0 > prev) throw ConfigError("gap in stage schedule before " + label);
    }
    for (int i : w.parameters) {
      if (i < 0 || i >= num_parameters) throw ConfigError(label + ": parameter index out of range");
    }
    for (int r : w.rows) {
      if (r < 0 || r >= num_rows) throw ConfigError(label + ": row index out of range");
    }
  }
}

StageMask StageSchedule::at(double t, int num_parameters, int num_rows) const {
  const int count = static_cast<int>(windows.size());
  for (int k = 0; k < count; ++k) {
    if (t < windows[k].t1 || (k + 1 == count && t == windows[k].t1)) {
      StageMask mask{k, std::vector<bool>(num_parameters, false),
                     std::vector<bool>(num_rows, false)};
      for (int i : windows[k].parameters) mask.parameters[i] = true;
      for (int r : windows[k].rows) mask.rows[r] = true;
      return mask;
    }
  }
  return StageMask::All(num_parameters, num_rows, count);
}

StageSchedule default_stage_schedule(int num_links) {
  StageSchedule s;
  double t = 0.0;
  const auto add = [&](std::string name, double length, std::vector<int> params,
                       std::vector<int> rows) {
    s.windows.push_back({std::move(name), t, t + length, std::move(params), std::move(rows)});
    t += length;
  };
  const auto range = [](int begin, int count) {
    std::vector<int> v(count);
    for (int i = 0; i < count; ++i) v[i] = begin + i;
    return v;
  };
  const std::vector<int> vehicle_rows = range(0, 6);

  for (int j = num_links - 1; j >= 0; --j) {
    add("joint " + std::to_string(j + 1), 3.0, range(param::link_offset(j), param::kLinkBlock),
        {6 + j});
  }
  const auto dof = [](std::initializer_list<int> dofs) {
    std::vector<int> v;
    for (int d : dofs) {
      v.push_back(param::kVehicleInertia + d);
      v.push_back(param::kDragLinear + d);
      v.push_back(param::kDragQuadratic + d);
    }
    return v;
  };
  add("yaw+heave", 4.0, dof({2, 5}), {2, 5});
  add("roll", 3.0, dof({3}), {3});
  add("pitch", 3.0, dof({4}), {4});
  std::vector<int> coupled = dof({0, 1});
  for (int c = 6; c < 10; ++c) coupled.push_back(c);
  add("couplings", 4.0, coupled, vehicle_rows);
  add("restoring", 4.0, range(param::kRestoring, 5), vehicle_rows);
  add("all", std::max(40.0 - t, 10.0), range(0, param::count(num_links)),
      range(0, 6 + num_links));
  return s;
}

void EstimatorConfig::validate(int num_parameters, int num_rows) const {
  if (horizon < 1) throw ConfigError("horizon N must be at least 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (!(q0 > 0.0)) throw ConfigError("q0 must be positive");
  if (!(psd_margin >= 0.0)) throw ConfigError("psd_margin must be non-negative");
  if (!(scale_floor >= 0.0)) throw ConfigError("scale_floor must be non-negative");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  stage_schedule.validate(num_parameters, num_rows);
}

EstimateState EstimateState::Initial(const ParameterVector& pi, double alpha) {
  EstimateState s;
  s.pi = pi;
  s.covariance = CovarianceState::Zero(pi.size(), alpha);
  s.sigma = MatX::Zero(pi.size(), pi.size());
  s.last_increment = VecX::Zero(pi.size());
  return s;
}

namespace {

/// Parameters sharing units and magnitude; the increment-penalty floor is
/// taken relative to the group.
int parameter_group(int index) {
  if (index < param::kVehicleCount) {
    if (index < 3) return 0;
    if (index < 6) return 1;
    if (index < 10) return 2;
    if (index < param::kDragQuadratic) return index < 13 ? 3 : 4;
    if (index < param::kRestoring) return index < 19 ? 5 : 6;
    return index < 24 ? 7 : 8;
  }
  const int link = (index - param::kVehicleCount) / param::kLinkBlock;
  const int local = (index - param::kVehicleCount) % param::kLinkBlock;
  int sub = 0;
  if (local == 0) sub = 0;
  else if (local < 4) sub = 1;
  else if (local < 10) sub = 2;
  else sub = local - 7;  // viscous 3, Coulomb 4
  return 9 + 5 * link + sub;
}

}  // namespace

VecX group_scale(const VecX& pi, double floor, double epsilon) {
  const int n = static_cast<int>(pi.size());
  std::vector<double> group_max(parameter_group(n - 1) + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    double& g = group_max[parameter_group(i)];
    g = std::max(g, std::abs(pi[i]));
  }
  VecX s(n);
  for (int i = 0; i < n; ++i) {
    s[i] = std::max({std::abs(pi[i]), floor * group_max[parameter_group(i)], epsilon});
  }
  return s;
}

namespace {

/// S(pi) = offset + sum_i pi_i B_i restricted to the active entries.
PsdBlock affine_block(const std::vector<std::pair<int, MatX>>& basis, const VecX& pi,
                      const std::vector<int>& slot, int size) {
  PsdBlock b;
  b.offset = MatX::Zero(size, size);
  for (const auto& [index, mat] : basis) {
    if (slot[index] >= 0) {
      b.terms.emplace_back(slot[index], mat);
    } else {
      b.offset += pi[index] * mat;
    }
  }
  return b;
}

std::vector<std::pair<int, MatX>> vehicle_basis(const VehicleInertiaLayout& layout) {
  std::vector<std::pair<int, MatX>> out;
  for (int k = 0; k < param::kVehicleInertiaCount; ++k) {
    Eigen::Matrix<double, 10, 1> unit = Eigen::Matrix<double, 10, 1>::Zero();
    unit[k] = 1.0;
    out.emplace_back(param::kVehicleInertia + k, MatX(build_vehicle_inertia(unit, layout)));
  }
  return out;
}

std::vector<std::pair<int, MatX>> link_basis(int link) {
  std::vector<std::pair<int, MatX>> out;
  for (int k = 0; k < 10; ++k) {
    Eigen::Matrix<double, 12, 1> unit = Eigen::Matrix<double, 12, 1>::Zero();
    unit[k] = 1.0;
    out.emplace_back(param::link_offset(link) + k, MatX(build_pseudo_inertia(unit)));
  }
  return out;
}

std::vector<ResidualBlock> huber_blocks(HuberScope scope, int entries, int rows_per_entry,
                                        double rho) {
  std::vector<ResidualBlock> out;
  const int total = entries * rows_per_entry;
  if (total == 0) return out;
  switch (scope) {
    case HuberScope::kFull:
      out.push_back({0, total, rho});
      break;
    case HuberScope::kBlock:
      for (int e = 0; e < entries; ++e) out.push_back({e * rows_per_entry, rows_per_entry, rho});
      break;
    case HuberScope::kElement:
      for (int r = 0; r < total; ++r) out.push_back({r, 1, rho});
      break;
  }
  return out;
}

}  // namespace

ConicProblem assemble_problem(const HorizonBuffer& buffer, const VecX& pi_prev,
                              const StageMask& mask, const EstimatorConfig& config,
                              const FeasibleSet& set) {
  const std::vector<int> active = mask.active_parameters();
  const std::vector<int> rows = mask.active_rows();
  const int k = static_cast<int>(active.size());
  const int p = static_cast<int>(pi_prev.size());
  std::vector<int> slot(p, -1);
  for (int i = 0; i < k; ++i) slot[active[i]] = i;

  ConicProblem prob;
  const VecX s = group_scale(pi_prev, config.scale_floor, config.epsilon);
  prob.q.resize(k);
  prob.x_ref.resize(k);
  for (int i = 0; i < k; ++i) {
    prob.q[i] = config.q0 / (s[active[i]] * s[active[i]]);
    prob.x_ref[i] = pi_prev[active[i]];
  }
  prob.anchor = prob.x_ref;

  VecX frozen = pi_prev;
  for (int i : active) frozen[i] = 0.0;

  const int per = static_cast<int>(rows.size());
  const int entries = buffer.size();
  prob.residual_matrix.resize(entries * per, k);
  prob.residual_offset.resize(entries * per);
  int r = 0;
  for (const HorizonEntry& e : buffer.entries()) {
    for (int row : rows) {
      const double w = e.row_weights[row];
      for (int i = 0; i < k; ++i) prob.residual_matrix(r, i) = w * e.y(row, active[i]);
      prob.residual_offset[r] = w * (e.tau[row] - e.y.row(row).dot(frozen));
      ++r;
    }
  }
  prob.huber_blocks = huber_blocks(config.huber_scope, entries, per, config.rho);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  prob.lower = VecX::Constant(k, -kInf);
  prob.upper = VecX::Constant(k, kInf);
  for (int d = 0; d < 6; ++d) {
    for (int base : {param::kDragLinear, param::kDragQuadratic}) {
      if (slot[base + d] >= 0) prob.upper[slot[base + d]] = 0.0;
    }
  }
  if (slot[param::kWeight] >= 0) {
    prob.lower[slot[param::kWeight]] = set.bounds.w_min;
    prob.upper[slot[param::kWeight]] = set.bounds.w_max;
  }
  for (int j = 0; j < set.num_links; ++j) {
    for (int f : {param::kViscous, param::kCoulomb}) {
      const int i = param::link_offset(j) + f;
      if (slot[i] >= 0) prob.lower[slot[i]] = 0.0;
    }
  }

  const auto add_block = [&](const std::vector<std::pair<int, MatX>>& basis, int size) {
    PsdBlock b = affine_block(basis, pi_prev, slot, size);
    if (!b.terms.empty()) prob.psd_blocks.push_back(std::move(b));
  };
  add_block(vehicle_basis(set.layout), 6);
  for (int j = 0; j < set.num_links; ++j) add_block(link_basis(j), 4);
  prob.psd_margin = config.psd_margin;
  return prob;
}

double horizon_objective(const HorizonBuffer& buffer, const VecX& pi, const StageMask& mask,
                         const EstimatorConfig& config) {
  const std::vector<int> rows = mask.active_rows();
  const int per = static_cast<int>(rows.size());
  VecX res(buffer.size() * per);
  int r = 0;
  for (const HorizonEntry& e : buffer.entries()) {
    for (int row : rows) res[r++] = e.row_weights[row] * (e.y.row(row).dot(pi) - e.tau[row]);
  }
  double total = 0.0;
  for (const ResidualBlock& b : huber_blocks(config.huber_scope, buffer.size(), per, config.rho)) {
    total += huber_value(res.segment(b.row_begin, b.row_count), b.rho);
  }
  return total;
}

namespace {

/// Moves the previous warm start along the horizon: rows of evicted samples
/// are dropped, rows of new samples start at their current value.
bool shift_warm(const EstimateState& state, const HorizonBuffer& buffer,
                const std::vector<int>& active, const ConicProblem& prob, WarmState& warm) {
  if (state.warm.empty() || state.warm_active != active) return false;
  warm = state.warm;
  const int per = prob.huber_blocks.empty()
                      ? 0
                      : static_cast<int>(prob.residual_matrix.rows()) / std::max(buffer.size(), 1);
  const std::int64_t added = buffer.total_pushed() - state.warm_pushed;
  const std::int64_t evicted = state.warm_size + added - buffer.size();
  if (added < 0 || evicted < 0 || evicted > state.warm_size) return false;
  const int old_res = state.warm_size * per;
  const int tail = static_cast<int>(warm.z.size()) - old_res;
  if (tail < 0) return false;
  const int new_res = static_cast<int>(prob.residual_matrix.rows());
  const int keep = old_res - static_cast<int>(evicted) * per;
  VecX z(new_res + tail), y(new_res + tail);
  z.head(keep) = warm.z.segment(old_res - keep, keep);
  y.head(keep) = warm.y.segment(old_res - keep, keep);
  const int fresh = new_res - keep;
  z.segment(keep, fresh) = prob.residual_matrix.bottomRows(fresh) * warm.x -
                           prob.residual_offset.tail(fresh);
  y.segment(keep, fresh).setZero();
  z.tail(tail) = warm.z.tail(tail);
  y.tail(tail) = warm.y.tail(tail);
  warm.z = std::move(z);
  warm.y = std::move(y);
  return true;
}

}  // namespace

EstimateState step(const EstimateState& state, const HorizonBuffer& buffer,
                   const StageMask& mask, const EstimatorConfig& config, const FeasibleSet& set,
                   const ConicSolver& solver) {
  if (buffer.empty()) throw std::invalid_argument("estimator step needs at least one sample");
  EstimateState next = state;
  next.stage = mask.stage;
  next.held = false;
  next.diagnostic.clear();
  const VecX& prev = state.pi.values();
  const std::vector<int> active = mask.active_parameters();

  VecX pi = prev;
  if (active.empty() || mask.active_rows().empty()) {
    next.status = SolveStatus::kOptimal;
    next.iterations = 0;
    next.solve_time_s = 0.0;
    next.warm = WarmState{};
  } else {
    const ConicProblem prob = assemble_problem(buffer, prev, mask, config, set);
    WarmState warm;
    const bool have_warm = shift_warm(state, buffer, active, prob, warm);
    const auto start = std::chrono::steady_clock::now();
    const Solution sol = solver.solve(prob, have_warm ? &warm : nullptr);
    next.solve_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    next.status = sol.status;
    next.iterations = sol.iterations;
    for (int i = 0; i < static_cast<int>(active.size()); ++i) pi[active[i]] = sol.x[i];

    std::string reason;
    if (sol.status != SolveStatus::kOptimal) {
      reason = "solver status " + to_string(sol.status);
    } else {
      const auto violations = feasibility_report(ParameterVector(pi), set.bounds);
      if (!violations.empty()) reason = "infeasible solution: " + violations.front().message;
    }
    if (reason.empty()) {
      next.warm = sol.warm_state;
      next.warm_active = active;
      next.warm_pushed = buffer.total_pushed();
      next.warm_size = buffer.size();
    } else {
      pi = prev;
      next.held = true;
      next.diagnostic = reason;
      next.warm = WarmState{};
      next.warm_active.clear();
    }
  }

  next.pi = ParameterVector(pi);
  next.last_increment = pi - prev;
  next.covariance = update_covariance(state.covariance, next.last_increment, prev);
  next.sigma = param_covariance(next.covariance, prev);
  next.objective = horizon_objective(buffer, pi, mask, config);
  return next;
}

MheEstimator::MheEstimator(UvmsModel skeleton, EstimatorConfig config,
                           const ParameterVector& initial, VehicleInertiaLayout layout)
    : skeleton_(std::move(skeleton)),
      config_(std::move(config)),
      buffer_(config_.horizon),
      solver_(config_.solver) {
  skeleton_.validate();
  const int p = param::count(skeleton_.num_links());
  config_.validate(p, skeleton_.dof());
  if (initial.size() != p) throw ConfigError("initial parameter vector has the wrong size");
  set_ = {skeleton_.num_links(), layout, skeleton_.bounds};
  // A frozen infeasible entry would make every later step fail.
  const auto violations = feasibility_report(initial, set_.bounds);
  if (!violations.empty()) {
    throw ConfigError("initial estimate is not physically consistent: " +
                      violations.front().message);
  }
  state_ = EstimateState::Initial(initial, config_.alpha);
  state_.covariance.epsilon = config_.epsilon;
  state_.covariance.ridge = config_.ridge;
  sum_squares_ = VecX::Zero(skeleton_.dof());
}

bool MheEstimator::push_sample(double t, const GeneralizedState& state,
                               const GeneralizedForce& tau, const std::optional<Vec6>& tau_mv,
                               std::string* diagnostic) {
  if (!buffer_.empty() && !(t > buffer_.entries().back().t)) {
    if (diagnostic) {
      *diagnostic = "rejected sample at t=" + std::to_string(t) + ": timestamp not after " +
                    std::to_string(buffer_.entries().back().t);
    }
    return false;
  }
  Vec6 coupling;
  if (tau_mv) {
    coupling = *tau_mv;
  } else {
    const UvmsModel current = with_parameters(skeleton_, state_.pi, set_.layout);
    coupling = hydro_rnea(current, state).coupling_marine();
  }
  HorizonEntry e = make_entry(skeleton_, t, state, tau, coupling, set_.layout);
  sum_squares_ += e.tau.cwiseAbs2();
  ++count_;
  const VecX rms = channel_rms();
  const double floor = std::max(1e-9, 1e-3 * rms.maxCoeff());
  e.row_weights = rms.cwiseMax(floor).cwiseInverse();
  return buffer_.push(std::move(e), diagnostic);
}

VecX MheEstimator::channel_rms() const {
  if (count_ == 0) return VecX::Zero(sum_squares_.size());
  return (sum_squares_ / static_cast<double>(count_)).cwiseSqrt();
}

StageMask MheEstimator::mask_at(double t) const {
  return config_.stage_schedule.at(t, param::count(skeleton_.num_links()), skeleton_.dof());
}

const EstimateState& MheEstimator::step(double t) {
  state_ = uvms::step(state_, buffer_, mask_at(t), config_, set_, solver_);
  return state_;
}

}  // namespace uvms
