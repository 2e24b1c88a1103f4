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

// uvms-id: simulate, identify, evaluate and compare from the command line.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "uvms/dynamics.hpp"
#include "uvms/estimator.hpp"
#include "uvms/harness.hpp"
#include "uvms/io.hpp"
#include "uvms/model.hpp"
#include "uvms/uncertainty.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace uvms::cli {
namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- run configuration ------------------------------------------------------

struct RunConfig {
  fs::path path;
  std::string text;
  fs::path model_path;
  fs::path schedule_path;
  std::uint64_t seed = 0;
  fs::path output_dir = "out";

  SynthesisOptions synthesis;
  EstimatorConfig estimator;
  bool staged = true;
  /// Relative perturbation of the model's parameters used as initial guess.
  double initial_perturbation = 0.0;
  double band_level = 0.95;
  double noise_window = 5.0;
};

template <typename T>
T get(const YAML::Node& node, const char* key, T fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("config: '") + key + "' has the wrong type (line " +
                      std::to_string(v.Mark().line + 1) + ")");
  }
}

void require_range(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  cfg.path = path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  cfg.text = ss.str();

  YAML::Node root;
  try {
    root = YAML::Load(cfg.text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  if (!root.IsMap()) throw ConfigError("config must be a YAML mapping");
  const fs::path base = fs::path(path).parent_path();

  if (!root["model_path"]) throw ConfigError("config: model_path is required");
  cfg.model_path = resolve(base, get<std::string>(root, "model_path", ""));
  if (!fs::exists(cfg.model_path)) {
    throw ConfigError("config: model_path '" + cfg.model_path.string() + "' does not exist");
  }
  if (root["schedule_path"]) {
    cfg.schedule_path = resolve(base, get<std::string>(root, "schedule_path", ""));
    if (!fs::exists(cfg.schedule_path)) {
      throw ConfigError("config: schedule_path '" + cfg.schedule_path.string() +
                        "' does not exist");
    }
  }
  cfg.seed = get<std::uint64_t>(root, "seed", 0);
  cfg.output_dir = get<std::string>(root, "output_dir", "out");

  if (const YAML::Node sim = root["simulation"]) {
    SynthesisOptions& s = cfg.synthesis;
    const std::string mode = get<std::string>(sim, "mode", "lumped");
    if (mode == "lumped") {
      s.mode = DatasetMode::kLumped;
    } else if (mode == "full_hydro") {
      s.mode = DatasetMode::kFullHydro;
    } else {
      throw ConfigError("config: simulation.mode must be lumped or full_hydro");
    }
    s.dt = get<double>(sim, "dt", s.dt);
    s.log_coupling = get<bool>(sim, "log_coupling", s.log_coupling);
    s.corruption.noise_std = get<double>(sim, "noise_std", 0.0);
    s.corruption.outlier_rate = get<double>(sim, "outlier_rate", 0.0);
    s.corruption.outlier_gain = get<double>(sim, "outlier_gain", 1.0);
    for (const YAML::Node& d : sim["drift"]) {
      s.drift.push_back({get<double>(d, "t_start", 0.0), get<double>(d, "ramp", 0.0),
                         get<double>(d, "added_mass_gain", 0.0)});
    }
    require_range(s.dt > 0.0 && s.dt <= 1.0, "simulation.dt must lie in (0, 1]");
    try {
      s.corruption.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  if (const YAML::Node est = root["estimator"]) {
    EstimatorConfig& e = cfg.estimator;
    e.horizon = get<int>(est, "horizon", e.horizon);
    e.alpha = get<double>(est, "alpha", e.alpha);
    e.rho = get<double>(est, "rho", e.rho);
    e.q0 = get<double>(est, "q0", e.q0);
    e.huber_scope = huber_scope_from_string(get<std::string>(est, "huber_scope", to_string(e.huber_scope)));
    e.solver.max_iterations = get<int>(est, "max_iterations", e.solver.max_iterations);
    cfg.staged = get<bool>(est, "staged", cfg.staged);
  }
  if (const YAML::Node id = root["identification"]) {
    cfg.initial_perturbation = get<double>(id, "initial_perturbation", 0.0);
    cfg.band_level = get<double>(id, "band_level", cfg.band_level);
    cfg.noise_window = get<double>(id, "noise_window", cfg.noise_window);
    require_range(cfg.initial_perturbation >= 0.0 && cfg.initial_perturbation <= 1.0,
                  "identification.initial_perturbation must lie in [0, 1]");
    require_range(cfg.band_level >= 0.0 && cfg.band_level < 1.0,
                  "identification.band_level must lie in [0, 1)");
    require_range(cfg.noise_window > 0.0, "identification.noise_window must be positive");
  }
  return cfg;
}

void check_estimator(const EstimatorConfig& e) {
  require_range(e.horizon >= 1 && e.horizon <= 10000, "horizon must lie in [1, 10000]");
  require_range(e.alpha > 0.0 && e.alpha <= 1.0, "alpha must lie in (0, 1]");
  require_range(e.rho > 0.0, "rho must be positive");
  require_range(e.q0 > 0.0 && std::isfinite(e.q0), "q0 must be positive and finite");
  require_range(e.solver.max_iterations >= 1, "max_iterations must be positive");
}

/// FNV-1a over the config and the files it references.
std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto feed = [&](const std::string& s) {
    for (const unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  feed(cfg.text);
  feed(io::read_file(cfg.model_path.string()));
  if (!cfg.schedule_path.empty()) feed(io::read_file(cfg.schedule_path.string()));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

UvmsModel load_model(const RunConfig& cfg) {
  return io::model_from_yaml(io::read_file(cfg.model_path.string()));
}

io::ExperimentSchedule load_schedule(const RunConfig& cfg, int num_links) {
  if (cfg.schedule_path.empty()) throw ConfigError("config: schedule_path is required");
  return io::schedule_from_yaml(io::read_file(cfg.schedule_path.string()), num_links);
}

std::vector<TelemetryRecord> load_telemetry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return io::read_telemetry(in);
}

/// Last object of a JSON-lines file or a whole JSON document.
VecX load_parameters(const std::string& path) {
  const std::string text = io::read_file(path);
  if (fs::path(path).extension() == ".jsonl") {
    std::istringstream in(text);
    std::string line, last;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) last = line;
    }
    if (last.empty()) throw DataError("'" + path + "' holds no parameters");
    return io::parameters_from_json(last);
  }
  return io::parameters_from_json(text);
}

void check_dimensions(const UvmsModel& model, const std::vector<TelemetryRecord>& records,
                      const VecX* pi = nullptr) {
  const int n = model.num_links();
  if (!records.empty() && records.front().state.mu.size() != n) {
    throw DataError("channel count mismatch: telemetry has " +
                    std::to_string(records.front().state.mu.size()) + " joints, model has " +
                    std::to_string(n));
  }
  if (pi && pi->size() != param::count(n)) {
    throw DataError("channel count mismatch: " + std::to_string(pi->size()) +
                    " parameters for a model expecting " + std::to_string(param::count(n)));
  }
}

void write_json(const fs::path& path, const Json& j) { io::write_file(path.string(), j.dump(2) + "\n"); }

Json manifest(const std::string& command, const RunConfig& cfg, std::uint64_t seed) {
  Json m;
  m["command"] = command;
  m["config"] = cfg.path.string();
  m["config_hash"] = config_hash(cfg);
  m["seed"] = seed;
  m["model_path"] = cfg.model_path.string();
  m["schedule_path"] = cfg.schedule_path.string();
  return m;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// --- commands ---------------------------------------------------------------

struct Shared {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  int trials = 1;
};

struct EstimatorFlags {
  std::optional<int> horizon;
  std::optional<double> alpha, rho, q0;
  std::optional<std::string> huber_scope;

  void apply(EstimatorConfig& e) const {
    if (horizon) e.horizon = *horizon;
    if (alpha) e.alpha = *alpha;
    if (rho) e.rho = *rho;
    if (q0) e.q0 = *q0;
    if (huber_scope) e.huber_scope = huber_scope_from_string(*huber_scope);
  }
};

fs::path output_dir(const RunConfig& cfg, const Shared& flags) {
  return flags.out.empty() ? resolve(cfg.path.parent_path(), cfg.output_dir.string())
                           : fs::path(flags.out);
}

/// Runs `body(trial, seed, dir)` for every trial on `jobs` workers. Each trial
/// writes into its own directory when there is more than one.
int fan_out(const Shared& flags, std::uint64_t seed, const fs::path& out,
            const std::function<void(int, std::uint64_t, const fs::path&)>& body);

void simulate_one(const RunConfig& cfg, std::uint64_t seed, const fs::path& dir) {
  const UvmsModel model = load_model(cfg);
  io::ExperimentSchedule schedule = load_schedule(cfg, model.num_links());
  schedule.excitation.seed += seed;
  SynthesisOptions opt = cfg.synthesis;
  opt.duration = schedule.duration;
  opt.rest_joints = schedule.rest_joints;
  opt.corruption.seed = seed;
  const Dataset ds = synthesize_dataset(model, schedule.excitation, opt);

  fs::create_directories(dir);
  std::ostringstream telemetry, truth;
  io::write_telemetry(telemetry, ds.records);
  io::write_ground_truth(truth, ds);
  io::write_file((dir / "telemetry.jsonl").string(), telemetry.str());
  io::write_file((dir / "ground_truth.jsonl").string(), truth.str());
  Json m = manifest("simulate", cfg, seed);
  m["records"] = ds.records.size();
  m["duration"] = schedule.duration;
  m["dt"] = opt.dt;
  m["outputs"] = {"telemetry.jsonl", "ground_truth.jsonl"};
  write_json(dir / "manifest.json", m);
  std::printf("simulate: %zu records -> %s\n", ds.records.size(), dir.string().c_str());
}

struct IdentifyInputs {
  std::string data;
  std::string initial;
  std::string truth;
};

void identify_one(const RunConfig& cfg, const IdentifyInputs& in, std::uint64_t seed,
                  const fs::path& dir) {
  const UvmsModel model = load_model(cfg);
  const std::vector<TelemetryRecord> records = load_telemetry(in.data);
  if (records.empty()) throw DataError("no samples");
  check_dimensions(model, records);
  const int n = model.num_links();

  EstimatorConfig ec = cfg.estimator;
  if (cfg.staged && !cfg.schedule_path.empty()) ec.stage_schedule = load_schedule(cfg, n).stages;
  check_estimator(ec);

  VecX initial;
  if (!in.initial.empty()) {
    initial = load_parameters(in.initial);
  } else {
    initial = lumped_parameters(model).values();
    if (cfg.initial_perturbation > 0.0) {
      initial = perturb_parameters(initial, model.bounds, seed, cfg.initial_perturbation);
    }
  }
  check_dimensions(model, records, &initial);

  IdentificationOptions opts;
  opts.band_level = cfg.band_level;
  opts.noise_window = cfg.noise_window;
  const IdentificationResult r =
      run_identification(model, records, ec, ParameterVector(initial), opts);
  if (r.steps.empty()) throw DataError("no samples accepted: " + r.rejected.front());

  std::vector<io::TraceRow> rows;
  std::vector<double> t, seconds;
  std::vector<VecX> std_dev;
  int held = 0;
  for (const StepRecord& s : r.steps) {
    rows.push_back({s.t, s.pi, s.stage, s.iterations, s.status, s.held, s.objective});
    t.push_back(s.t);
    seconds.push_back(s.solve_time_s);
    std_dev.push_back(s.std_dev);
    held += s.held ? 1 : 0;
  }
  const VecX& final_pi = r.steps.back().pi;
  if (!final_pi.allFinite()) throw NumericalError("estimate is not finite");
  if (!feasibility_report(ParameterVector(final_pi), model.bounds).empty()) {
    throw NumericalError("final estimate violates physical consistency");
  }

  fs::create_directories(dir);
  std::ostringstream trace, unc, times;
  io::write_parameter_trace(trace, rows, n);
  io::write_uncertainty_trace(unc, t, std_dev, n);
  io::write_solve_times(times, t, seconds);
  io::write_file((dir / "parameter_trace.csv").string(), trace.str());
  io::write_file((dir / "uncertainty_trace.csv").string(), unc.str());
  io::write_file((dir / "solve_times.csv").string(), times.str());
  io::write_file((dir / "parameters.json").string(), io::parameters_json(final_pi, n) + "\n");
  if (!r.bands.empty()) {
    std::vector<io::BandRow> bands;
    for (const BandSample& b : r.bands) bands.push_back({b.t, b.predicted, b.measured, b.lo, b.hi});
    std::vector<std::string> channels = channel_names(n);
    for (int i = 0; i < 6; ++i) channels[i] += "+coupling";
    std::ostringstream band;
    io::write_band_csv(band, bands, channels);
    io::write_file((dir / "online_bands.csv").string(), band.str());
  }

  Json summary;
  summary["samples"] = records.size();
  summary["steps"] = r.steps.size();
  summary["rejected"] = r.rejected.size();
  summary["held"] = held;
  Json st;
  st["median"] = quantile(seconds, 0.5);
  st["p90"] = quantile(seconds, 0.9);
  st["p99"] = quantile(seconds, 0.99);
  st["max"] = quantile(seconds, 1.0);
  summary["solve_time_s"] = st;
  std::vector<double> iterations;
  for (const StepRecord& s : r.steps) iterations.push_back(s.iterations);
  summary["iterations_median"] = quantile(iterations, 0.5);
  summary["final_objective"] = r.steps.back().objective;
  if (!in.truth.empty()) {
    const VecX truth = load_parameters(in.truth);
    check_dimensions(model, records, &truth);
    Dataset ds;
    ds.records = records;
    const IdentifiabilityReport ident = identifiability(model, ds, truth);
    Json errors = Json::object();
    double worst = 0.0;
    for (int i = param::kVehicleCount; i < truth.size(); ++i) {
      if (!ident.identifiable[static_cast<std::size_t>(i)]) continue;
      const double e = std::abs(final_pi[i] - truth[i]) / std::abs(truth[i]);
      errors[param::name(i, n)] = e;
      worst = std::max(worst, e);
    }
    summary["identifiable_manipulator_errors"] = errors;
    summary["max_identifiable_manipulator_error"] = worst;
  }
  write_json(dir / "summary.json", summary);
  Json m = manifest("identify", cfg, seed);
  m["data"] = in.data;
  m["outputs"] = {"parameter_trace.csv", "uncertainty_trace.csv", "solve_times.csv",
                  "parameters.json", "summary.json"};
  write_json(dir / "manifest.json", m);
  std::printf("identify: %zu steps, %d held, median solve %.4f s -> %s\n", r.steps.size(), held,
              quantile(seconds, 0.5), dir.string().c_str());
}

struct EvaluateInputs {
  std::string data;
  std::string params;
  std::string uncertainty;
  double level = 0.95;
};

void evaluate(const RunConfig& cfg, const EvaluateInputs& in, const fs::path& dir) {
  const UvmsModel model = load_model(cfg);
  const std::vector<TelemetryRecord> records = load_telemetry(in.data);
  if (records.empty()) throw DataError("no samples");
  const VecX pi = load_parameters(in.params);
  check_dimensions(model, records, &pi);
  const int n = model.num_links();
  const std::vector<std::string> names = channel_names(n);

  const MatX predicted = predict_torques(model, pi, records);
  const MatX measured = measured_torques(records);
  const MetricReport report = compute_metrics(predicted, measured, names);

  MatX sigma = MatX::Zero(pi.size(), pi.size());
  if (!in.uncertainty.empty()) {
    std::ifstream u(in.uncertainty, std::ios::binary);
    if (!u) throw DataError("cannot open '" + in.uncertainty + "'");
    const std::vector<io::UncertaintyRow> rows = io::read_uncertainty_trace(u);
    if (rows.empty()) throw DataError("uncertainty trace holds no rows");
    if (rows.back().std_dev.size() != pi.size()) {
      throw DataError("channel count mismatch: uncertainty trace has " +
                      std::to_string(rows.back().std_dev.size()) + " parameters");
    }
    sigma = rows.back().std_dev.cwiseAbs2().asDiagonal();
  }
  // Residual variance about the mean error of each channel.
  const MatX residual = measured - predicted;
  const VecX mean = residual.colwise().mean().transpose();
  const VecX noise = (residual.rowwise() - mean.transpose()).colwise().squaredNorm().transpose() /
                     static_cast<double>(std::max<Eigen::Index>(residual.rows() - 1, 1));
  const std::vector<BandSample> bands = prediction_bands(model, pi, sigma, noise, records, in.level);
  std::vector<io::BandRow> rows;
  for (const BandSample& b : bands) rows.push_back({b.t, b.predicted, b.measured, b.lo, b.hi});

  fs::create_directories(dir);
  io::write_file((dir / "metrics.json").string(), io::metrics_json(report) + "\n");
  std::ostringstream parity, band;
  io::write_parity_csv(parity, measured, predicted, names);
  io::write_band_csv(band, rows, names);
  io::write_file((dir / "parity.csv").string(), parity.str());
  io::write_file((dir / "bands.csv").string(), band.str());
  for (const ChannelMetrics& c : report.channels) {
    std::printf("%-8s R2 %s  slope %.4f  rmse %.4g\n", c.name.c_str(),
                c.r2 ? io::format_double(*c.r2).c_str() : "n/a", c.slope, c.rmse);
  }
}

struct CompareInputs {
  std::string data;
  std::string fixed;
  std::string trace;
  double t_from = 0.0;
};

void compare(const RunConfig& cfg, const CompareInputs& in, const fs::path& dir) {
  const UvmsModel model = load_model(cfg);
  Dataset ds;
  ds.records = load_telemetry(in.data);
  if (ds.records.empty()) throw DataError("no samples");
  const VecX fixed = load_parameters(in.fixed);
  check_dimensions(model, ds.records, &fixed);
  std::ifstream t(in.trace, std::ios::binary);
  if (!t) throw DataError("cannot open '" + in.trace + "'");
  std::vector<VecX> trace;
  for (const io::TraceRow& row : io::read_parameter_trace(t)) {
    check_dimensions(model, ds.records, &row.pi);
    trace.push_back(row.pi);
  }
  if (trace.size() != ds.records.size()) {
    throw DataError("parameter trace has " + std::to_string(trace.size()) + " rows for " +
                    std::to_string(ds.records.size()) + " samples");
  }
  const ComparisonReport report = compare_models(model, ds, fixed, trace, in.t_from);
  fs::create_directories(dir);
  io::write_file((dir / "comparison.json").string(), io::comparison_json(report) + "\n");
  for (std::size_t c = 0; c < report.names.size(); ++c) {
    std::printf("%-8s delta rmse %+.4g  delta mae %+.4g\n", report.names[c].c_str(),
                report.delta_rmse[static_cast<Eigen::Index>(c)],
                report.delta_mae[static_cast<Eigen::Index>(c)]);
  }
}

int classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kUsage;
  if (dynamic_cast<const DataError*>(&e)) return kData;
  if (dynamic_cast<const NumericalError*>(&e) || dynamic_cast<const SingularInertiaError*>(&e)) {
    return kNumerical;
  }
  if (dynamic_cast<const std::invalid_argument*>(&e)) return kUsage;
  return kNumerical;
}

int fan_out(const Shared& flags, std::uint64_t seed, const fs::path& out,
            const std::function<void(int, std::uint64_t, const fs::path&)>& body) {
  if (flags.trials == 1) {
    body(0, seed, out);
    return kOk;
  }
  std::atomic<int> next{0};
  std::mutex mutex;
  int worst = kOk;
  const auto worker = [&] {
    for (int k = next++; k < flags.trials; k = next++) {
      char name[32];
      std::snprintf(name, sizeof name, "trial_%03d", k);
      int code = kOk;
      try {
        body(k, seed + static_cast<std::uint64_t>(k), out / name);
      } catch (const std::exception& e) {
        code = classify(e);
        const std::lock_guard<std::mutex> lock(mutex);
        std::fprintf(stderr, "trial %d: %s\n", k, e.what());
      }
      const std::lock_guard<std::mutex> lock(mutex);
      worst = std::max(worst, code);
    }
  };
  std::vector<std::thread> pool;
  const int jobs = std::clamp(flags.jobs, 1, flags.trials);
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  return worst;
}

int run(int argc, char** argv) {
  CLI::App app{"Online identification of underwater vehicle-manipulator dynamics"};
  app.require_subcommand(1);

  Shared shared;
  EstimatorFlags est;
  const auto add_shared = [&](CLI::App* cmd, bool trials) {
    cmd->add_option("--config", shared.config, "Run configuration (YAML)")->required();
    cmd->add_option("--seed", shared.seed, "Seed overriding the configuration");
    cmd->add_option("--out", shared.out, "Output directory");
    cmd->add_option("--jobs", shared.jobs, "Worker threads for --trials")->check(CLI::PositiveNumber);
    if (trials) {
      cmd->add_option("--trials", shared.trials, "Independent seeds seed, seed+1, ...")
          ->check(CLI::PositiveNumber);
    }
  };

  CLI::App* sim = app.add_subcommand("simulate", "Synthesize telemetry and ground truth");
  add_shared(sim, true);

  IdentifyInputs id_in;
  CLI::App* ident = app.add_subcommand("identify", "Run the moving-horizon estimator on a log");
  add_shared(ident, true);
  ident->add_option("--data", id_in.data, "Telemetry log (JSON lines); with --trials, the "
                                          "directory written by simulate --trials")
      ->required();
  ident->add_option("--initial", id_in.initial, "Initial parameters (JSON)");
  ident->add_option("--truth", id_in.truth, "Ground truth for the summary (JSON or JSON lines)");
  ident->add_option("--horizon", est.horizon, "Horizon length N");
  ident->add_option("--alpha", est.alpha, "Covariance importance factor");
  ident->add_option("--rho", est.rho, "Huber threshold after row normalization");
  ident->add_option("--q0", est.q0, "Increment penalty");
  ident->add_option("--huber-scope", est.huber_scope, "Huber grouping")
      ->check(CLI::IsMember({"full", "block", "element"}));

  EvaluateInputs ev_in;
  CLI::App* eval = app.add_subcommand("evaluate", "Prediction metrics, parity and band data");
  add_shared(eval, false);
  eval->add_option("--data", ev_in.data, "Telemetry log (JSON lines)")->required();
  eval->add_option("--params", ev_in.params, "Parameters (JSON, or last line of JSON lines)")
      ->required();
  eval->add_option("--uncertainty", ev_in.uncertainty, "Uncertainty trace; last row is used");
  eval->add_option("--level", ev_in.level, "Band confidence level")->check(CLI::Range(0.5, 0.999999));

  CompareInputs cmp_in;
  CLI::App* cmp = app.add_subcommand("compare", "Fixed versus adaptive prediction errors");
  add_shared(cmp, false);
  cmp->add_option("--data", cmp_in.data, "Telemetry log (JSON lines)")->required();
  cmp->add_option("--fixed", cmp_in.fixed, "Fixed parameters (JSON)")->required();
  cmp->add_option("--trace", cmp_in.trace, "Parameter trace CSV")->required();
  cmp->add_option("--from", cmp_in.t_from, "Ignore samples before this time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    RunConfig cfg = load_config(shared.config);
    est.apply(cfg.estimator);
    check_estimator(cfg.estimator);
    const std::uint64_t seed = shared.seed.value_or(cfg.seed);
    const fs::path out = output_dir(cfg, shared);

    if (*sim) {
      return fan_out(shared, seed, out, [&](int, std::uint64_t s, const fs::path& dir) {
        simulate_one(cfg, s, dir);
      });
    }
    if (*ident) {
      return fan_out(shared, seed, out, [&](int k, std::uint64_t s, const fs::path& dir) {
        IdentifyInputs in = id_in;
        if (shared.trials > 1) {
          char name[32];
          std::snprintf(name, sizeof name, "trial_%03d", k);
          in.data = (fs::path(id_in.data) / name / "telemetry.jsonl").string();
          if (!id_in.truth.empty()) in.truth = (fs::path(id_in.truth) / name / "ground_truth.jsonl").string();
        }
        identify_one(cfg, in, s, dir);
      });
    }
    if (*eval) {
      evaluate(cfg, ev_in, out);
      return kOk;
    }
    if (*cmp) {
      compare(cfg, cmp_in, out);
      return kOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return classify(e);
  }
  return kUsage;
}

}  // namespace
}  // namespace uvms::cli

int main(int argc, char** argv) { return uvms::cli::run(argc, argv); }
