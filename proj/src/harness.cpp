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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "uvms/estimator.hpp"
#include "uvms/regressor.hpp"
#include "uvms/uncertainty.hpp"

namespace uvms {

std::string to_string(Waveform waveform) {
  switch (waveform) {
    case Waveform::kMultisine: return "multisine";
    case Waveform::kChirp: return "chirp";
    case Waveform::kQuasiStatic: return "quasi_static";
  }
  return "multisine";
}

Waveform waveform_from_string(const std::string& text) {
  if (text == "multisine") return Waveform::kMultisine;
  if (text == "chirp") return Waveform::kChirp;
  if (text == "quasi_static") return Waveform::kQuasiStatic;
  throw std::invalid_argument("unknown waveform '" + text + "'");
}

void ExcitationSchedule::validate(int num_links) const {
  for (std::size_t k = 0; k < stages.size(); ++k) {
    const ExcitationStage& s = stages[k];
    const std::string label = "excitation stage '" + s.name + "'";
    if (!(s.t1 > s.t0) || s.t0 < 0.0) throw std::invalid_argument(label + ": bad time window");
    if (k > 0 && s.t0 < stages[k - 1].t1) {
      throw std::invalid_argument(label + " overlaps the previous stage");
    }
    if (!std::isfinite(s.amplitude)) throw std::invalid_argument(label + ": amplitude not finite");
    if (!(s.f_lo > 0.0 && s.f_hi >= s.f_lo && std::isfinite(s.f_hi))) {
      throw std::invalid_argument(label + ": bad frequency band");
    }
    for (int c : s.targets) {
      if (c < 0 || c >= 6 + num_links) throw std::invalid_argument(label + ": target out of range");
    }
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// C2 fade-in/out over `ramp` seconds at both ends of [t0, t1].
double taper(double t, double t0, double t1) {
  const double ramp = std::min(0.5, 0.25 * (t1 - t0));
  const double s = std::clamp(std::min(t - t0, t1 - t) / ramp, 0.0, 1.0);
  return s * s * s * (10.0 + s * (6.0 * s - 15.0));
}

double stage_signal(const ExcitationStage& s, int coordinate, std::uint64_t seed, double t) {
  const double tau = t - s.t0;
  const double span = s.t1 - s.t0;
  double value = 0.0;
  switch (s.waveform) {
    case Waveform::kMultisine: {
      std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(coordinate) * 7919ULL +
                          static_cast<std::uint64_t>(std::llround(s.t0 * 1000.0)));
      std::uniform_real_distribution<double> phase(0.0, kTwoPi);
      double f[3], w[3], total = 0.0;
      for (int k = 0; k < 3; ++k) {
        // Golden-ratio spacing keeps the frequencies incommensurate.
        const double u = std::fmod(0.137 + 0.381966 * k + 0.0618034 * coordinate, 1.0);
        f[k] = s.f_lo + (s.f_hi - s.f_lo) * u;
        w[k] = 1.0 / f[k];
        total += w[k];
      }
      for (int k = 0; k < 3; ++k) {
        value += s.amplitude * w[k] / total * std::sin(kTwoPi * f[k] * tau + phase(rng));
      }
      break;
    }
    case Waveform::kChirp:
      value = s.amplitude *
              std::sin(kTwoPi * (s.f_lo * tau + 0.5 * (s.f_hi - s.f_lo) * tau * tau / span));
      break;
    case Waveform::kQuasiStatic:
      value = s.amplitude * span / kTwoPi * std::sin(kTwoPi * tau / span);
      break;
  }
  return taper(t, s.t0, s.t1) * value;
}

}  // namespace

VecX ExcitationSchedule::offset(double t, int num_links) const {
  VecX out = VecX::Zero(6 + num_links);
  for (const ExcitationStage& s : stages) {
    if (t < s.t0 || t > s.t1) continue;
    for (int c : s.targets) out[c] += stage_signal(s, c, seed, t);
  }
  return out;
}

ExcitationSchedule default_excitation(int num_links, double duration, std::uint64_t seed) {
  ExcitationSchedule sched;
  sched.seed = seed;
  double t = 0.0;
  const auto add = [&](std::string name, double length, std::vector<int> targets,
                       Waveform waveform, double amplitude) {
    sched.stages.push_back({std::move(name), t, t + length, std::move(targets), waveform,
                            amplitude, 0.1, 1.5});
    t += length;
  };
  for (int j = num_links - 1; j >= 0; --j) {
    add("joint " + std::to_string(j + 1), 3.0, {6 + j}, Waveform::kMultisine, 1.2);
  }
  add("yaw+heave", 4.0, {2, 5}, Waveform::kMultisine, 0.4);
  add("roll", 3.0, {3}, Waveform::kMultisine, 0.25);
  add("pitch", 3.0, {4}, Waveform::kMultisine, 0.25);
  add("couplings", 4.0, {0, 1, 3, 4}, Waveform::kMultisine, 0.3);
  add("restoring", 4.0, {3, 4}, Waveform::kQuasiStatic, 0.02);
  if (duration > t) {
    std::vector<int> all(6 + num_links);
    for (int i = 0; i < 6 + num_links; ++i) all[i] = i;
    add("all", duration - t, all, Waveform::kMultisine, 0.5);
  }
  return sched;
}

ExcitationSchedule full_excitation(int num_links, double duration, std::uint64_t seed) {
  ExcitationSchedule sched;
  sched.seed = seed;
  if (!(duration > 0.0)) return sched;
  std::vector<int> all(6 + num_links);
  for (int i = 0; i < 6 + num_links; ++i) all[i] = i;
  sched.stages.push_back({"all", 0.0, duration, all, Waveform::kMultisine, 0.3, 0.1, 1.5});
  return sched;
}

void CorruptionSpec::validate() const {
  if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be >= 0");
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) {
    throw std::invalid_argument("outlier_rate must lie in [0, 1]");
  }
  if (!(outlier_gain >= 1.0)) throw std::invalid_argument("outlier_gain must be >= 1");
}

UvmsModel drifted_model(const UvmsModel& model, const std::vector<DriftEvent>& drift, double t) {
  double gain = 0.0;
  for (const DriftEvent& e : drift) {
    if (t < e.t_start) continue;
    const double frac = e.ramp > 0.0 ? std::min(1.0, (t - e.t_start) / e.ramp) : 1.0;
    gain += frac * e.added_mass_gain;
  }
  if (gain == 0.0) return model;
  UvmsModel out = model;
  out.vehicle.hydro.added_mass *= 1.0 + gain;
  return out;
}

namespace {

double wrap_angle(double a) { return std::remainder(a, kTwoPi); }

VecX numeric_derivative(const ExcitationSchedule& s, int n, double t, int order) {
  const double h = 1e-4;
  const VecX plus = s.offset(t + h, n), minus = s.offset(t - h, n);
  if (order == 1) return (plus - minus) / (2.0 * h);
  return (plus - 2.0 * s.offset(t, n) + minus) / (h * h);
}

}  // namespace

Dataset synthesize_dataset(const UvmsModel& model, const ExcitationSchedule& schedule,
                           const SynthesisOptions& options) {
  const int n = model.num_links();
  schedule.validate(n);
  options.corruption.validate();
  if (!(options.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const VecX rest = options.rest_joints.size() == n ? options.rest_joints : VecX::Zero(n);

  const long steps = std::lround(options.duration / options.dt);
  std::vector<UvmsModel> models;
  const auto model_for = [&](double t) {
    const UvmsModel m = drifted_model(model, options.drift, t);
    return options.mode == DatasetMode::kLumped ? lumped_model(m) : m;
  };
  const bool drifting = !options.drift.empty();
  if (drifting) {
    models.reserve(static_cast<std::size_t>(steps) + 1);
    for (long k = 0; k <= steps; ++k) models.push_back(model_for(k * options.dt));
  } else {
    models.push_back(model_for(0.0));
  }
  // Piecewise constant over each integration step.
  const ModelAt model_at = [&](double t) -> const UvmsModel& {
    if (!drifting) return models.front();
    const long k = std::clamp<long>(static_cast<long>(std::floor(t / options.dt + 1e-9)), 0,
                                    static_cast<long>(models.size()) - 1);
    return models[static_cast<std::size_t>(k)];
  };

  constexpr double kp = 16.0, kd = 8.0;
  const Controller controller = [&](double t, const GeneralizedState& s) {
    const VecX ref = schedule.offset(t, n);
    const VecX ref_d = numeric_derivative(schedule, n, t, 1);
    const VecX ref_dd = numeric_derivative(schedule, n, t, 2);
    GeneralizedState d = s;

    const Mat6 jac = euler_kinematics(s.eta);
    const Vec6 eta_dot = jac * s.nu;
    Vec6 err = ref.head<6>() - s.eta;
    for (int i = 3; i < 6; ++i) err[i] = wrap_angle(err[i]);
    const Vec6 eta_dd = ref_dd.head<6>() + kd * (ref_d.head<6>() - eta_dot) + kp * err;
    const double h = 1e-6;
    const Vec6 jdot_nu = (euler_kinematics(s.eta + h * eta_dot) - jac) * s.nu / h;
    d.nu_dot = jac.lu().solve(eta_dd - jdot_nu);
    d.mu_ddot = ref_dd.tail(n) + kd * (ref_d.tail(n) - s.mu_dot) +
                kp * (rest + ref.tail(n) - s.mu);
    return hydro_rnea(model_at(t), d).generalized();
  };

  GeneralizedState initial = GeneralizedState::Zero(n);
  initial.eta = schedule.offset(0.0, n).head<6>();
  initial.mu = rest + schedule.offset(0.0, n).tail(n);
  const Trajectory traj = simulate(model_at, initial, controller, options.dt, options.duration);
  if (traj.truncated) throw DataError("dataset generation aborted at " + traj.diagnostic);

  Dataset ds;
  const std::size_t count = traj.samples.size();
  ds.records.resize(count);
  ds.clean_tau.resize(count);
  ds.clean_tau_mv.resize(count);
  ds.pi_true.resize(count);
  ds.outlier.assign(count, false);
  for (std::size_t k = 0; k < count; ++k) {
    const TrajectorySample& s = traj.samples[k];
    ds.records[k].t = s.t;
    ds.records[k].state = s.state;
    ds.clean_tau[k] = s.force;
    ds.clean_tau_mv[k] = s.coupling;
    ds.pi_true[k] = lumped_parameters(model_at(s.t)).values();
  }

  // Corruption touches only the exported measurements.
  const CorruptionSpec& c = options.corruption;
  VecX rms = VecX::Zero(6 + n);
  Vec6 rms_mv = Vec6::Zero();
  for (std::size_t k = 0; k < count; ++k) {
    rms += ds.clean_tau[k].stacked().cwiseAbs2();
    rms_mv += ds.clean_tau_mv[k].cwiseAbs2();
  }
  if (count > 0) {
    rms = (rms / static_cast<double>(count)).cwiseSqrt();
    rms_mv = (rms_mv / static_cast<double>(count)).cwiseSqrt();
  }
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t k = 0; k < count; ++k) {
    VecX tau = ds.clean_tau[k].stacked();
    Vec6 mv = ds.clean_tau_mv[k];
    if (c.noise_std > 0.0) {
      for (int i = 0; i < tau.size(); ++i) tau[i] += c.noise_std * rms[i] * normal(rng);
      for (int i = 0; i < 6; ++i) mv[i] += c.noise_std * rms_mv[i] * normal(rng);
    }
    if (c.outlier_rate > 0.0 && unit(rng) < c.outlier_rate) {
      tau *= c.outlier_gain;
      mv *= c.outlier_gain;
      ds.outlier[k] = true;
    }
    ds.records[k].tau = GeneralizedForce::FromStacked(tau);
    if (options.log_coupling) ds.records[k].tau_mv = mv;
  }
  return ds;
}

const ChannelMetrics& MetricReport::channel(const std::string& name) const {
  for (const ChannelMetrics& c : channels) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no metrics for channel '" + name + "'");
}

std::vector<std::string> channel_names(int num_links) {
  std::vector<std::string> names{"surge", "sway", "heave", "roll", "pitch", "yaw"};
  for (int j = 0; j < num_links; ++j) names.push_back("joint" + std::to_string(j + 1));
  return names;
}

MetricReport compute_metrics(const MatX& predicted, const MatX& measured,
                             const std::vector<std::string>& names) {
  if (predicted.rows() != measured.rows() || predicted.cols() != measured.cols()) {
    throw std::invalid_argument("predicted and measured series differ in shape");
  }
  if (!names.empty() && static_cast<int>(names.size()) != measured.cols()) {
    throw std::invalid_argument("channel name count does not match the series");
  }
  MetricReport report;
  const double count = static_cast<double>(measured.rows());
  for (int c = 0; c < measured.cols(); ++c) {
    ChannelMetrics m;
    m.name = names.empty() ? "channel" + std::to_string(c) : names[c];
    m.count = static_cast<int>(measured.rows());
    if (m.count > 0) {
      const VecX p = predicted.col(c), y = measured.col(c);
      const VecX res = y - p;
      m.mse = res.squaredNorm() / count;
      m.mae = res.cwiseAbs().sum() / count;
      m.rmse = std::sqrt(m.mse);
      m.mean_error = -res.sum() / count;
      const double pp = p.squaredNorm();
      m.slope = pp > 0.0 ? p.dot(y) / pp : 0.0;
      const double ss_tot = (y.array() - y.mean()).square().sum();
      if (ss_tot > 0.0) m.r2 = 1.0 - res.squaredNorm() / ss_tot;
    }
    report.channels.push_back(std::move(m));
  }
  return report;
}

MatX predict_torques(const UvmsModel& skeleton, const VecX& pi,
                     const std::vector<TelemetryRecord>& records) {
  const UvmsModel model = with_parameters(skeleton, ParameterVector(pi));
  MatX out(records.size(), skeleton.dof());
  for (std::size_t k = 0; k < records.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) =
        hydro_rnea(model, records[k].state).generalized().stacked().transpose();
  }
  return out;
}

PredictionJacobian::PredictionJacobian(const UvmsModel& skeleton, const VecX& pi_ref)
    : reference_(with_parameters(skeleton, ParameterVector(pi_ref))), step_(pi_ref.size()) {
  shifted_.reserve(static_cast<std::size_t>(pi_ref.size()));
  for (int i = 0; i < pi_ref.size(); ++i) {
    // Shifting upwards keeps W positive, which the restoring arms require.
    step_[i] = std::max(std::abs(pi_ref[i]), 1.0);
    VecX pi = pi_ref;
    pi[i] += step_[i];
    shifted_.push_back(with_parameters(skeleton, ParameterVector(pi)));
  }
}

MatX PredictionJacobian::operator()(const GeneralizedState& state) const {
  const VecX base = hydro_rnea(reference_, state).generalized().stacked();
  MatX j(base.size(), step_.size());
  for (int i = 0; i < step_.size(); ++i) {
    j.col(i) = (hydro_rnea(shifted_[static_cast<std::size_t>(i)], state).generalized().stacked() -
                base) / step_[i];
  }
  return j;
}

std::vector<BandSample> prediction_bands(const UvmsModel& skeleton, const VecX& pi,
                                         const MatX& sigma_pi, const VecX& noise_variance,
                                         const std::vector<TelemetryRecord>& records,
                                         double level) {
  const double z = normal_quantile(level);
  const UvmsModel model = with_parameters(skeleton, ParameterVector(pi));
  const PredictionJacobian jacobian(skeleton, pi);
  std::vector<BandSample> out;
  out.reserve(records.size());
  for (const TelemetryRecord& r : records) {
    BandSample b;
    b.t = r.t;
    b.predicted = hydro_rnea(model, r.state).generalized().stacked();
    b.measured = r.tau.stacked();
    if (b.measured.size() != b.predicted.size() || noise_variance.size() != b.predicted.size()) {
      throw DataError("channel count mismatch between data and model");
    }
    const VecX half =
        z * propagate_torque_cov(jacobian(r.state), sigma_pi, noise_variance).diagonal().cwiseSqrt();
    b.lo = b.predicted - half;
    b.hi = b.predicted + half;
    out.push_back(std::move(b));
  }
  return out;
}

MatX measured_torques(const std::vector<TelemetryRecord>& records) {
  const int dof = records.empty() ? 0 : static_cast<int>(records[0].tau.stacked().size());
  MatX out(records.size(), dof);
  for (std::size_t k = 0; k < records.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = records[k].tau.stacked().transpose();
  }
  return out;
}

ComparisonReport compare_models(const UvmsModel& skeleton, const Dataset& dataset,
                                const VecX& pi_fixed, const std::vector<VecX>& pi_trace,
                                double t_from) {
  const auto& recs = dataset.records;
  if (pi_trace.size() != recs.size()) {
    throw std::invalid_argument("parameter trace length does not match the dataset");
  }
  std::vector<TelemetryRecord> kept;
  std::vector<std::size_t> index;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    if (recs[k].t >= t_from) {
      kept.push_back(recs[k]);
      index.push_back(k);
    }
  }
  const MatX measured = measured_torques(kept);
  const MatX fixed = predict_torques(skeleton, pi_fixed, kept);
  MatX adaptive(kept.size(), skeleton.dof());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const std::size_t k = index[i];
    const VecX& pi = pi_trace[k == 0 ? 0 : k - 1];
    const UvmsModel m = with_parameters(skeleton, ParameterVector(pi));
    adaptive.row(static_cast<Eigen::Index>(i)) =
        hydro_rnea(m, kept[i].state).generalized().stacked().transpose();
  }
  ComparisonReport out;
  out.names = channel_names(skeleton.num_links());
  out.fixed = compute_metrics(fixed, measured, out.names);
  out.adaptive = compute_metrics(adaptive, measured, out.names);
  const int c = static_cast<int>(out.names.size());
  out.delta_mae.resize(c);
  out.delta_rmse.resize(c);
  out.delta_mean_error.resize(c);
  for (int i = 0; i < c; ++i) {
    out.delta_mae[i] = out.adaptive.channels[i].mae - out.fixed.channels[i].mae;
    out.delta_rmse[i] = out.adaptive.channels[i].rmse - out.fixed.channels[i].rmse;
    out.delta_mean_error[i] =
        out.adaptive.channels[i].mean_error - out.fixed.channels[i].mean_error;
  }
  return out;
}

VecX perturb_parameters(const VecX& truth, const WeightBounds& bounds, std::uint64_t seed,
                        double min_fraction) {
  const ParameterVector check(truth);
  const int n = check.num_links();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto factor = [&] {
    const double u = unit(rng);
    return unit(rng) < 0.5 ? 1.0 + min_fraction * (1.0 + u)
                           : std::max(0.05, 1.0 - min_fraction * (1.0 + 0.5 * u));
  };
  VecX pi = truth;
  pi.segment(param::kVehicleInertia, param::kVehicleInertiaCount) *= factor();
  for (int d = 0; d < 6; ++d) {
    pi[param::kDragLinear + d] *= factor();
    pi[param::kDragQuadratic + d] *= factor();
  }
  for (int k = 2; k < 5; ++k) pi[param::kRestoring + k] *= factor();
  // W and B keep their difference ratio; W stays inside its interval.
  const double w = truth[param::kWeight];
  if (w > 0.0) {
    const double target = unit(rng) < 0.5 ? bounds.w_max : bounds.w_min;
    const double gain = std::isfinite(target) && target > 0.0 ? target / w : 1.0;
    pi[param::kWeight] *= gain;
    pi[param::kBuoyancy] *= gain;
  }
  for (int j = 0; j < n; ++j) {
    const int o = param::link_offset(j);
    pi.segment(o, 10) *= factor();
    pi[o + param::kViscous] *= factor();
    pi[o + param::kCoulomb] *= factor();
  }
  return pi;
}

IdentificationResult run_identification(const UvmsModel& skeleton,
                                        const std::vector<TelemetryRecord>& records,
                                        const EstimatorConfig& config,
                                        const ParameterVector& initial,
                                        const IdentificationOptions& options) {
  MheEstimator est(skeleton, config, initial);
  IdentificationResult out;
  out.steps.reserve(records.size());
  const double z = options.band_level > 0.0 ? normal_quantile(options.band_level) : 0.0;
  ResidualWindow window(options.noise_window);
  const int dof = skeleton.dof();
  for (const TelemetryRecord& r : records) {
    std::string diag;
    if (!est.push_sample(r.t, r.state, r.tau, r.tau_mv, &diag)) {
      out.rejected.push_back(diag);
      continue;
    }
    const HorizonEntry& e = est.buffer().entries().back();
    if (z > 0.0) {
      const EstimateState& prior = est.state();
      BandSample b;
      b.t = r.t;
      b.predicted = e.y * prior.pi.values();
      b.measured = e.tau;
      const MatX cov = propagate_torque_cov(e.y, prior.sigma, window.variance(dof));
      const VecX half = z * cov.diagonal().cwiseMax(0.0).cwiseSqrt();
      b.lo = b.predicted - half;
      b.hi = b.predicted + half;
      out.bands.push_back(std::move(b));
    }
    const EstimateState& s = est.step(r.t);
    window.push(r.t, e.tau - e.y * s.pi.values());
    StepRecord rec;
    rec.t = r.t;
    rec.pi = s.pi.values();
    rec.std_dev = s.sigma.diagonal().cwiseMax(0.0).cwiseSqrt();
    rec.stage = s.stage;
    rec.iterations = s.iterations;
    rec.status = s.status;
    rec.held = s.held;
    rec.objective = s.objective;
    rec.solve_time_s = s.solve_time_s;
    rec.diagnostic = s.diagnostic;
    out.steps.push_back(std::move(rec));
  }
  return out;
}

IdentifiabilityReport identifiability(const UvmsModel& skeleton, const Dataset& dataset,
                                      const VecX& pi_ref, double noise_fraction,
                                      double std_tol) {
  const int p = param::count(skeleton.num_links());
  const int dof = skeleton.dof();
  VecX rms = VecX::Zero(dof);
  for (const TelemetryRecord& r : dataset.records) {
    VecX b = r.tau.stacked();
    if (r.tau_mv) b.head<6>() += *r.tau_mv;
    rms += b.cwiseAbs2();
  }
  if (!dataset.records.empty()) {
    rms = (rms / static_cast<double>(dataset.records.size())).cwiseSqrt();
  }
  const VecX row_w = rms.cwiseMax(1e-3 * rms.maxCoeff()).cwiseMax(1e-12).cwiseInverse();
  const VecX col = group_scale(pi_ref, 0.05, 1e-6);

  MatX gram = MatX::Zero(p, p);
  for (const TelemetryRecord& r : dataset.records) {
    const MatX y = row_w.asDiagonal() * system_regressor(skeleton, r.state).assembled *
                   col.asDiagonal();
    gram.noalias() += y.transpose() * y;
  }
  Eigen::SelfAdjointEigenSolver<MatX> es(gram);
  const VecX lambda = es.eigenvalues().cwiseMax(0.0);
  IdentifiabilityReport out;
  out.singular_values = lambda.cwiseSqrt().reverse();
  const double cutoff = 1e-16 * lambda.maxCoeff();
  out.null_component = VecX::Zero(p);
  VecX variance = VecX::Zero(p);
  out.rank = 0;
  for (int k = 0; k < p; ++k) {
    const VecX v2 = es.eigenvectors().col(k).cwiseAbs2();
    if (lambda[k] > cutoff && lambda[k] > 0.0) {
      ++out.rank;
      variance += v2 / lambda[k];
    } else {
      out.null_component += v2;
    }
  }
  out.null_component = out.null_component.cwiseSqrt();
  out.relative_std.resize(p);
  out.identifiable.resize(p);
  for (int i = 0; i < p; ++i) {
    const bool in_range = out.null_component[i] < 1e-6;
    const double scale = col[i] / std::max(std::abs(pi_ref[i]), 1e-12);
    out.relative_std[i] = in_range ? noise_fraction * std::sqrt(variance[i]) * scale
                                   : std::numeric_limits<double>::infinity();
    out.identifiable[i] = out.relative_std[i] <= std_tol;
  }
  return out;
}

}  // namespace uvms
