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

// File formats: JSON-lines telemetry and ground truth, CSV traces, YAML
// models and experiment schedules. Readers throw DataError (with the
// offending line where one exists); YAML readers throw ConfigError.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "uvms/estimator.hpp"
#include "uvms/harness.hpp"

namespace uvms::io {

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

// --- telemetry --------------------------------------------------------------

/// One JSON object per line: t, eta, nu, nu_dot, mu, mu_dot, mu_ddot, tau_v,
/// tau_m and, when logged, tau_mv.
void write_telemetry(std::ostream& out, const std::vector<TelemetryRecord>& records);
std::vector<TelemetryRecord> read_telemetry(std::istream& in);

struct TruthSample {
  double t = 0.0;
  VecX pi;
};

/// Sidecar lines {t, pi_true}.
void write_ground_truth(std::ostream& out, const Dataset& dataset);
std::vector<TruthSample> read_ground_truth(std::istream& in);

// --- traces -----------------------------------------------------------------

struct TraceRow {
  double t = 0.0;
  VecX pi;
  int stage = 0;
  int iterations = 0;
  SolveStatus status = SolveStatus::kOptimal;
  bool held = false;
  double objective = 0.0;
};

TraceRow trace_row(double t, const EstimateState& state);

/// Columns t, one per parameter, stage, iterations, status, objective. Held
/// steps carry status "held:<solver status>" (or "held:infeasible_solution").
void write_parameter_trace(std::ostream& out, const std::vector<TraceRow>& rows, int num_links);
std::vector<TraceRow> read_parameter_trace(std::istream& in);

/// Columns t, then the standard deviation of every parameter.
void write_uncertainty_trace(std::ostream& out, const std::vector<double>& t,
                             const std::vector<VecX>& std_dev, int num_links);

struct UncertaintyRow {
  double t = 0.0;
  VecX std_dev;
};
std::vector<UncertaintyRow> read_uncertainty_trace(std::istream& in);

/// Columns t, solve_time_s.
void write_solve_times(std::ostream& out, const std::vector<double>& t,
                       const std::vector<double>& seconds);

struct BandRow {
  double t = 0.0;
  VecX predicted;
  VecX measured;
  VecX lo;
  VecX hi;
};

/// Long format: t, channel, tau_pred, tau_meas, lo, hi.
void write_band_csv(std::ostream& out, const std::vector<BandRow>& rows,
                    const std::vector<std::string>& channels);

/// Long format: channel, measured, predicted.
void write_parity_csv(std::ostream& out, const MatX& measured, const MatX& predicted,
                      const std::vector<std::string>& channels);

// --- JSON documents ---------------------------------------------------------

std::string metrics_json(const MetricReport& report);
MetricReport metrics_from_json(const std::string& text);
std::string comparison_json(const ComparisonReport& report);

/// {"pi": [...]}; also accepts a bare array or a ground-truth line.
std::string parameters_json(const VecX& pi, int num_links);
VecX parameters_from_json(const std::string& text);

// --- YAML -------------------------------------------------------------------

UvmsModel model_from_yaml(const std::string& text);
std::string model_to_yaml(const UvmsModel& model);

/// Excitation plan plus the estimator stage windows that go with it.
struct ExperimentSchedule {
  ExcitationSchedule excitation;
  StageSchedule stages;
  VecX rest_joints;
  double duration = 40.0;
};

/// Either `preset: staged` / `preset: full` with an optional `duration`, or
/// explicit `excitation` and `stages` lists.
ExperimentSchedule schedule_from_yaml(const std::string& text, int num_links);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace uvms::io
