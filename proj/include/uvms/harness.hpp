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

// Synthetic experiments: reference vehicle-manipulator, staged excitation,
// corrupted telemetry, identification metrics and model comparison.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uvms/dynamics.hpp"
#include "uvms/estimator.hpp"
#include "uvms/model.hpp"
#include "uvms/solver.hpp"

namespace uvms {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// BlueROV2-class vehicle carrying a 4-link arm (joint axes z, y, y, x). With
/// `full_hydro` the links carry added mass, drag, buoyancy and rotor inertias;
/// without it the model is lumped.
UvmsModel reference_model(bool full_hydro = false);

/// with_parameters(model, lumped_parameters(model)).
UvmsModel lumped_model(const UvmsModel& model);

enum class Waveform { kMultisine, kChirp, kQuasiStatic };
std::string to_string(Waveform waveform);
Waveform waveform_from_string(const std::string& text);

/// Excites the generalized coordinates `targets` (0-5 vehicle pose, 6 + j
/// joint j) during [t0, t1). Multisine and chirp amplitudes are position
/// amplitudes; quasi-static amplitudes are peak rates.
struct ExcitationStage {
  std::string name;
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<int> targets;
  Waveform waveform = Waveform::kMultisine;
  double amplitude = 0.0;
  double f_lo = 0.1;
  double f_hi = 1.5;
};

struct ExcitationSchedule {
  std::vector<ExcitationStage> stages;
  /// Seeds the multisine phases.
  std::uint64_t seed = 0;

  /// Stages ordered and non-overlapping, targets in range, finite
  /// amplitudes and 0 < f_lo <= f_hi. Throws std::invalid_argument.
  void validate(int num_links) const;
  /// Position offsets of every coordinate from the rest pose at time t.
  VecX offset(double t, int num_links) const;
};

/// Staged protocol matching default_stage_schedule: distal-to-proximal joint
/// stages, yaw + heave, roll, pitch, surge/sway, quasi-static tilting, then
/// everything together until `duration`.
ExcitationSchedule default_excitation(int num_links, double duration = 40.0,
                                      std::uint64_t seed = 0);
/// Every coordinate excited at once over [0, duration); used for held-out data.
ExcitationSchedule full_excitation(int num_links, double duration, std::uint64_t seed);

struct CorruptionSpec {
  /// Gaussian noise std as a fraction of each channel's RMS.
  double noise_std = 0.0;
  double outlier_rate = 0.0;
  double outlier_gain = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Scales the vehicle added mass by (1 + gain) from t_start, linearly over
/// `ramp` seconds (a step when ramp = 0).
struct DriftEvent {
  double t_start = 0.0;
  double ramp = 0.0;
  double added_mass_gain = 0.0;
};

enum class DatasetMode { kLumped, kFullHydro };

struct TelemetryRecord {
  double t = 0.0;
  GeneralizedState state;
  GeneralizedForce tau;
  std::optional<Vec6> tau_mv;
};

struct Dataset {
  std::vector<TelemetryRecord> records;
  /// Noise-free forces and coupling for every record.
  std::vector<GeneralizedForce> clean_tau;
  std::vector<Vec6> clean_tau_mv;
  /// Lumped ground truth at every record.
  std::vector<VecX> pi_true;
  /// Records whose measurement was turned into an outlier.
  std::vector<bool> outlier;
};

struct SynthesisOptions {
  DatasetMode mode = DatasetMode::kLumped;
  CorruptionSpec corruption;
  std::vector<DriftEvent> drift;
  double dt = 0.02;
  double duration = 40.0;
  /// Export the coupling wrench as a measured channel.
  bool log_coupling = true;
  /// Rest configuration of the arm; zeros when empty.
  VecX rest_joints;
};

/// Tracks the schedule with computed torque plus PD feedback on the true
/// model and integrates with RK4. Every record satisfies tau = Y pi_true up
/// to corruption in lumped mode. Throws DataError on a pitch singularity.
Dataset synthesize_dataset(const UvmsModel& model, const ExcitationSchedule& schedule,
                           const SynthesisOptions& options);

/// Model at time t with the drift events applied.
UvmsModel drifted_model(const UvmsModel& model, const std::vector<DriftEvent>& drift, double t);

struct ChannelMetrics {
  std::string name;
  /// Absent for a zero-variance measured channel.
  std::optional<double> r2;
  double slope = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double mean_error = 0.0;
  int count = 0;
};

struct MetricReport {
  std::vector<ChannelMetrics> channels;
  const ChannelMetrics& channel(const std::string& name) const;
};

/// Columns are channels. R^2 = 1 - SS_res / SS_tot; slope is the
/// least-squares slope of measured against predicted through the origin.
/// Throws std::invalid_argument on shape mismatch.
MetricReport compute_metrics(const MatX& predicted, const MatX& measured,
                             const std::vector<std::string>& names = {});

/// surge ... yaw, joint1 ... jointn.
std::vector<std::string> channel_names(int num_links);

/// Inverse-dynamics torques [tau_v; tau_m] of every record under pi.
MatX predict_torques(const UvmsModel& skeleton, const VecX& pi,
                     const std::vector<TelemetryRecord>& records);
/// d[tau_v; tau_m]/d pi of the inverse dynamics. The torques are linear in
/// the lumped parameters, so each column is an exact difference between the
/// reference point and a shifted copy.
class PredictionJacobian {
 public:
  PredictionJacobian(const UvmsModel& skeleton, const VecX& pi_ref);
  MatX operator()(const GeneralizedState& state) const;

 private:
  UvmsModel reference_;
  std::vector<UvmsModel> shifted_;
  VecX step_;
};

/// Measured [tau_v; tau_m] of every record.
MatX measured_torques(const std::vector<TelemetryRecord>& records);

struct ComparisonReport {
  MetricReport fixed;
  MetricReport adaptive;
  /// adaptive - fixed, per channel.
  std::vector<std::string> names;
  VecX delta_mae;
  VecX delta_rmse;
  VecX delta_mean_error;
};

/// Fixed predictions use pi_fixed throughout; adaptive predictions of record
/// k use pi_trace[k - 1] (pi_trace[0] for the first record), so no record is
/// predicted with parameters fitted to it. Records before `t_from` are skipped.
ComparisonReport compare_models(const UvmsModel& skeleton, const Dataset& dataset,
                                const VecX& pi_fixed, const std::vector<VecX>& pi_trace,
                                double t_from = 0.0);

/// Initial guess at least `min_fraction` away from `truth` in relative terms:
/// every link inertial block, every friction coefficient and the vehicle
/// inertia, drag and moment arms are scaled by a random factor in
/// [1 + f, 1 + 2f] or [1 - 1.5f, 1 - f] (floored at 0.05). Scaling whole blocks keeps
/// them physically consistent. W and B move by a common factor that keeps W
/// inside `bounds`.
VecX perturb_parameters(const VecX& truth, const WeightBounds& bounds, std::uint64_t seed,
                        double min_fraction = 0.5);

struct IdentificationOptions {
  /// Predictive torque bands at this level; none when 0.
  double band_level = 0.0;
  /// Trailing window of posterior residuals for the noise variance.
  double noise_window = 5.0;
};

struct StepRecord {
  double t = 0.0;
  VecX pi;
  /// sqrt(diag Sigma_pi).
  VecX std_dev;
  int stage = 0;
  int iterations = 0;
  SolveStatus status = SolveStatus::kOptimal;
  bool held = false;
  double objective = 0.0;
  double solve_time_s = 0.0;
  std::string diagnostic;
};

/// Prediction for a sample from the estimate before that sample was used.
/// Channels are the estimator's measurement rows [tau_v + tau_mv; tau_m].
struct BandSample {
  double t = 0.0;
  VecX predicted;
  VecX measured;
  VecX lo;
  VecX hi;
};

/// Prediction bands for every record: predictions under pi, covariance
/// J sigma_pi J^T + diag(noise_variance), half-width z(level) sqrt(diag).
std::vector<BandSample> prediction_bands(const UvmsModel& skeleton, const VecX& pi,
                                         const MatX& sigma_pi, const VecX& noise_variance,
                                         const std::vector<TelemetryRecord>& records,
                                         double level);

struct IdentificationResult {
  std::vector<StepRecord> steps;
  std::vector<BandSample> bands;
  std::vector<std::string> rejected;
};

/// Pushes every record and steps the estimator once per record.
IdentificationResult run_identification(const UvmsModel& skeleton,
                                        const std::vector<TelemetryRecord>& records,
                                        const EstimatorConfig& config,
                                        const ParameterVector& initial,
                                        const IdentificationOptions& options = {});

struct IdentifiabilityReport {
  VecX singular_values;
  /// Numerical rank (singular values above 1e-8 sigma_max).
  int rank = 0;
  /// Per parameter: norm of its coordinate in the numerical null space.
  VecX null_component;
  /// Per parameter: least-squares standard deviation relative to |pi_ref_i|
  /// for per-row noise `noise_fraction` of channel RMS; +inf on null directions.
  VecX relative_std;
  std::vector<bool> identifiable;
};

/// Batch analysis of the stacked regressor with rows normalized by channel RMS
/// and columns scaled by max(|pi_ref_i|, floor_i). A parameter is identifiable
/// when it has no null-space component and its relative standard deviation is
/// at most `std_tol`.
IdentifiabilityReport identifiability(const UvmsModel& skeleton, const Dataset& dataset,
                                      const VecX& pi_ref, double noise_fraction = 0.02,
                                      double std_tol = 0.005);

}  // namespace uvms
