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

// Moving-horizon estimation of the lumped parameter vector. Each step solves
//
//   minimize    |pi - pi_prev|^2_Q + sum huber_rho(W (Y pi - tau))
//   subject to  pi in the physically consistent set, frozen entries fixed
//
// over the last N samples, warm-started from the previous step.

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "uvms/dynamics.hpp"
#include "uvms/model.hpp"
#include "uvms/solver.hpp"
#include "uvms/uncertainty.hpp"

namespace uvms {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class HuberScope { kFull, kBlock, kElement };
std::string to_string(HuberScope scope);
/// Accepts "full", "block" and "element"; throws ConfigError otherwise.
HuberScope huber_scope_from_string(const std::string& text);

struct HorizonEntry {
  double t = 0.0;
  /// (6+n) x P regressor.
  MatX y;
  /// [tau_v + tau_mv; tau_m]
  VecX tau;
  /// Per-channel normalization applied to the rows of y and tau.
  VecX row_weights;
};

class HorizonBuffer {
 public:
  explicit HorizonBuffer(int capacity = 50);

  /// Appends in chronological order, evicting the oldest entry beyond the
  /// capacity. Returns false and leaves the buffer unchanged when t does not
  /// exceed the last timestamp.
  bool push(HorizonEntry entry, std::string* diagnostic = nullptr);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  const std::deque<HorizonEntry>& entries() const { return entries_; }
  /// Number of entries accepted since construction.
  std::int64_t total_pushed() const { return total_pushed_; }

 private:
  int capacity_;
  std::deque<HorizonEntry> entries_;
  std::int64_t total_pushed_ = 0;
};

/// Regressor row [tau_v + tau_mv; tau_m] for one sample; unit row weights.
HorizonEntry make_entry(const UvmsModel& skeleton, double t, const GeneralizedState& state,
                        const GeneralizedForce& tau, const Vec6& tau_mv,
                        const VehicleInertiaLayout& layout = {});

/// Parameters and measurement rows released during [t0, t1).
struct StageWindow {
  std::string name;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<int> parameters;
  std::vector<int> rows;
};

struct StageMask {
  /// Index into the schedule; equal to the window count past the last window.
  int stage = 0;
  std::vector<bool> parameters;
  std::vector<bool> rows;

  static StageMask All(int num_parameters, int num_rows, int stage = 0);
  std::vector<int> active_parameters() const;
  std::vector<int> active_rows() const;
};

struct StageSchedule {
  std::vector<StageWindow> windows;

  /// Windows must start at 0, be ordered and contiguous (no gap, no overlap),
  /// and reference indices below the given bounds. Throws ConfigError.
  void validate(int num_parameters, int num_rows) const;
  bool empty() const { return windows.empty(); }
  /// Mask of the window containing t; everything is active past the last
  /// window or when the schedule is empty.
  StageMask at(double t, int num_parameters, int num_rows) const;
};

/// Distal-to-proximal joint stages of 3 s, then yaw + heave, roll, pitch,
/// surge/sway with the couplings, restoring, and a final all-active window
/// ending at 40 s for a 4-link arm.
StageSchedule default_stage_schedule(int num_links);

struct EstimatorConfig {
  int horizon = 50;
  double alpha = 0.05;
  double rho = 1.0;
  double q0 = 10.0;
  double psd_margin = 1e-8;
  HuberScope huber_scope = HuberScope::kBlock;
  StageSchedule stage_schedule;
  /// Floor on the increment-penalty scale relative to the largest magnitude in
  /// the parameter's physical group.
  double scale_floor = 0.05;
  double epsilon = 1e-6;
  double ridge = 1e-9;
  SolverSettings solver;

  void validate(int num_parameters, int num_rows) const;
};

struct EstimateState {
  ParameterVector pi{0};
  MatX sigma;
  CovarianceState covariance;
  WarmState warm;
  int stage = -1;
  VecX last_increment;

  SolveStatus status = SolveStatus::kOptimal;
  bool held = false;
  int iterations = 0;
  double objective = 0.0;
  double solve_time_s = 0.0;
  std::string diagnostic;

  /// Bookkeeping for shifting the warm start along the horizon.
  std::vector<int> warm_active;
  std::int64_t warm_pushed = 0;
  int warm_size = 0;

  static EstimateState Initial(const ParameterVector& pi, double alpha);
};

/// max(|pi_i|, floor * largest magnitude in pi_i's physical group, epsilon).
/// Groups share units: vehicle translational / rotational / coupling inertia,
/// each drag family split the same way, W and B, restoring arms, and per link
/// mass, first moments, rotational inertia, viscous and Coulomb friction.
VecX group_scale(const VecX& pi, double floor, double epsilon);

/// Static description of the feasible set.
struct FeasibleSet {
  int num_links = 0;
  VehicleInertiaLayout layout;
  WeightBounds bounds;
};

/// Problem over the active parameters of `mask`; frozen entries are folded
/// into the offsets. x_ref and anchor are the active entries of pi_prev.
ConicProblem assemble_problem(const HorizonBuffer& buffer, const VecX& pi_prev,
                              const StageMask& mask, const EstimatorConfig& config,
                              const FeasibleSet& set);

/// Data term of the horizon objective at pi on the active rows of `mask`.
double horizon_objective(const HorizonBuffer& buffer, const VecX& pi, const StageMask& mask,
                         const EstimatorConfig& config);

/// One MHE update. Non-optimal or infeasible solves hold the previous
/// estimate. Throws std::invalid_argument on an empty buffer.
EstimateState step(const EstimateState& state, const HorizonBuffer& buffer,
                   const StageMask& mask, const EstimatorConfig& config, const FeasibleSet& set,
                   const ConicSolver& solver);

/// Stateful wrapper: running channel normalization, coupling defaulting,
/// stage selection and solver ownership.
class MheEstimator {
 public:
  MheEstimator(UvmsModel skeleton, EstimatorConfig config, const ParameterVector& initial,
               VehicleInertiaLayout layout = {});

  /// tau_mv defaults to the coupling predicted by the current estimate.
  bool push_sample(double t, const GeneralizedState& state, const GeneralizedForce& tau,
                   const std::optional<Vec6>& tau_mv = std::nullopt,
                   std::string* diagnostic = nullptr);
  const EstimateState& step(double t);

  const EstimateState& state() const { return state_; }
  const HorizonBuffer& buffer() const { return buffer_; }
  const EstimatorConfig& config() const { return config_; }
  const UvmsModel& skeleton() const { return skeleton_; }
  const FeasibleSet& feasible_set() const { return set_; }
  StageMask mask_at(double t) const;
  /// Running RMS of each measurement channel.
  VecX channel_rms() const;

 private:
  UvmsModel skeleton_;
  EstimatorConfig config_;
  FeasibleSet set_;
  HorizonBuffer buffer_;
  EstimateState state_;
  AdmmSolver solver_;
  VecX sum_squares_;
  std::int64_t count_ = 0;
};

}  // namespace uvms
