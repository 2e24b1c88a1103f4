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

#include "uvms/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace uvms::io {

using Json = nlohmann::ordered_json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

Json array_of(const VecX& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

VecX vector_field(const Json& obj, const char* key, int expected, std::size_t line) {
  if (!obj.contains(key)) throw DataError(at_line(line) + "missing key '" + key + "'");
  const Json& a = obj.at(key);
  if (!a.is_array()) throw DataError(at_line(line) + "'" + key + "' is not an array");
  if (expected >= 0 && static_cast<int>(a.size()) != expected) {
    throw DataError(at_line(line) + "'" + key + "' has " + std::to_string(a.size()) +
                    " entries, expected " + std::to_string(expected));
  }
  VecX v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw DataError(at_line(line) + "'" + key + "' holds a non-number");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

double number_field(const Json& obj, const char* key, std::size_t line) {
  if (!obj.contains(key) || !obj.at(key).is_number()) {
    throw DataError(at_line(line) + "missing numeric key '" + key + "'");
  }
  return obj.at(key).get<double>();
}

Json parse_line(const std::string& text, std::size_t line) {
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw DataError(at_line(line) + "expected a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    throw DataError(at_line(line) + "malformed JSON (" + e.what() + ")");
  }
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r") == std::string::npos; }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError(at_line(line) + "not a number: '" + s + "'");
  }
  return v;
}

void check_stream(const std::ostream& out) {
  if (!out) throw DataError("write failed");
}

}  // namespace

void write_telemetry(std::ostream& out, const std::vector<TelemetryRecord>& records) {
  for (const TelemetryRecord& r : records) {
    Json j;
    j["t"] = r.t;
    j["eta"] = array_of(r.state.eta);
    j["nu"] = array_of(r.state.nu);
    j["nu_dot"] = array_of(r.state.nu_dot);
    j["mu"] = array_of(r.state.mu);
    j["mu_dot"] = array_of(r.state.mu_dot);
    j["mu_ddot"] = array_of(r.state.mu_ddot);
    j["tau_v"] = array_of(r.tau.tau_v);
    j["tau_m"] = array_of(r.tau.tau_m);
    if (r.tau_mv) j["tau_mv"] = array_of(*r.tau_mv);
    out << j.dump() << '\n';
  }
  check_stream(out);
}

std::vector<TelemetryRecord> read_telemetry(std::istream& in) {
  std::vector<TelemetryRecord> records;
  std::string text;
  std::size_t line = 0;
  int n = -1;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const Json j = parse_line(text, line);
    TelemetryRecord r;
    r.t = number_field(j, "t", line);
    if (n < 0) n = static_cast<int>(vector_field(j, "mu", -1, line).size());
    GeneralizedState s = GeneralizedState::Zero(n);
    s.eta = vector_field(j, "eta", 6, line);
    s.nu = vector_field(j, "nu", 6, line);
    s.nu_dot = vector_field(j, "nu_dot", 6, line);
    s.mu = vector_field(j, "mu", n, line);
    s.mu_dot = vector_field(j, "mu_dot", n, line);
    s.mu_ddot = vector_field(j, "mu_ddot", n, line);
    r.state = s;
    r.tau.tau_v = vector_field(j, "tau_v", 6, line);
    r.tau.tau_m = vector_field(j, "tau_m", n, line);
    if (j.contains("tau_mv") && !j.at("tau_mv").is_null()) {
      r.tau_mv = Vec6(vector_field(j, "tau_mv", 6, line));
    }
    if (!records.empty() && !(r.t > records.back().t)) {
      throw DataError(at_line(line) + "timestamps must increase");
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_ground_truth(std::ostream& out, const Dataset& dataset) {
  for (std::size_t k = 0; k < dataset.records.size(); ++k) {
    Json j;
    j["t"] = dataset.records[k].t;
    j["pi_true"] = array_of(dataset.pi_true[k]);
    out << j.dump() << '\n';
  }
  check_stream(out);
}

std::vector<TruthSample> read_ground_truth(std::istream& in) {
  std::vector<TruthSample> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const Json j = parse_line(text, line);
    TruthSample s{number_field(j, "t", line), vector_field(j, "pi_true", -1, line)};
    if (!out.empty() && s.pi.size() != out.front().pi.size()) {
      throw DataError(at_line(line) + "pi_true length changed");
    }
    out.push_back(std::move(s));
  }
  return out;
}

TraceRow trace_row(double t, const EstimateState& state) {
  return {t, state.pi.values(), state.stage, state.iterations, state.status, state.held,
          state.objective};
}

namespace {

std::string status_cell(const TraceRow& row) {
  if (!row.held) return to_string(row.status);
  return "held:" + (row.status == SolveStatus::kOptimal ? std::string("infeasible_solution")
                                                        : to_string(row.status));
}

SolveStatus status_from_string(const std::string& s, std::size_t line) {
  for (SolveStatus st :
       {SolveStatus::kOptimal, SolveStatus::kMaxIterations, SolveStatus::kInfeasible}) {
    if (s == to_string(st)) return st;
  }
  throw DataError(at_line(line) + "unknown solver status '" + s + "'");
}

}  // namespace

void write_parameter_trace(std::ostream& out, const std::vector<TraceRow>& rows, int num_links) {
  const int p = param::count(num_links);
  out << "t";
  for (int i = 0; i < p; ++i) out << ',' << param::name(i, num_links);
  out << ",stage,iterations,status,objective\n";
  for (const TraceRow& r : rows) {
    if (r.pi.size() != p) throw DataError("trace row has the wrong parameter count");
    out << format_double(r.t);
    for (int i = 0; i < p; ++i) out << ',' << format_double(r.pi[i]);
    out << ',' << r.stage << ',' << r.iterations << ',' << status_cell(r) << ','
        << format_double(r.objective) << '\n';
  }
  check_stream(out);
}

std::vector<TraceRow> read_parameter_trace(std::istream& in) {
  std::string text;
  std::size_t line = 1;
  if (!std::getline(in, text)) throw DataError("empty parameter trace");
  const std::vector<std::string> header = split_csv(text);
  const int cols = static_cast<int>(header.size());
  if (cols < 6 || header.front() != "t" || header[cols - 4] != "stage" ||
      header[cols - 1] != "objective") {
    throw DataError(at_line(1) + "unexpected parameter trace header");
  }
  const int p = cols - 5;
  std::vector<TraceRow> rows;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const std::vector<std::string> cells = split_csv(text);
    if (static_cast<int>(cells.size()) != cols) {
      throw DataError(at_line(line) + "expected " + std::to_string(cols) + " columns");
    }
    TraceRow r;
    r.t = parse_number(cells[0], line);
    r.pi.resize(p);
    for (int i = 0; i < p; ++i) r.pi[i] = parse_number(cells[1 + i], line);
    r.stage = static_cast<int>(parse_number(cells[cols - 4], line));
    r.iterations = static_cast<int>(parse_number(cells[cols - 3], line));
    std::string status = cells[cols - 2];
    if (status.rfind("held:", 0) == 0) {
      r.held = true;
      status = status.substr(5);
      r.status = status == "infeasible_solution" ? SolveStatus::kOptimal
                                                 : status_from_string(status, line);
    } else {
      r.status = status_from_string(status, line);
    }
    r.objective = parse_number(cells[cols - 1], line);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_uncertainty_trace(std::ostream& out, const std::vector<double>& t,
                             const std::vector<VecX>& std_dev, int num_links) {
  if (t.size() != std_dev.size()) throw DataError("uncertainty trace length mismatch");
  const int p = param::count(num_links);
  out << "t";
  for (int i = 0; i < p; ++i) out << ",std." << param::name(i, num_links);
  out << '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    out << format_double(t[k]);
    for (int i = 0; i < p; ++i) out << ',' << format_double(std_dev[k][i]);
    out << '\n';
  }
  check_stream(out);
}

std::vector<UncertaintyRow> read_uncertainty_trace(std::istream& in) {
  std::string text;
  std::size_t line = 1;
  if (!std::getline(in, text)) throw DataError("empty uncertainty trace");
  const std::vector<std::string> header = split_csv(text);
  const int cols = static_cast<int>(header.size());
  if (cols < 2 || header.front() != "t") {
    throw DataError(at_line(1) + "unexpected uncertainty trace header");
  }
  std::vector<UncertaintyRow> rows;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    const std::vector<std::string> cells = split_csv(text);
    if (static_cast<int>(cells.size()) != cols) {
      throw DataError(at_line(line) + "expected " + std::to_string(cols) + " columns");
    }
    UncertaintyRow r;
    r.t = parse_number(cells[0], line);
    r.std_dev.resize(cols - 1);
    for (int i = 1; i < cols; ++i) r.std_dev[i - 1] = parse_number(cells[i], line);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_solve_times(std::ostream& out, const std::vector<double>& t,
                       const std::vector<double>& seconds) {
  if (t.size() != seconds.size()) throw DataError("solve-time trace length mismatch");
  out << "t,solve_time_s\n";
  for (std::size_t k = 0; k < t.size(); ++k) {
    out << format_double(t[k]) << ',' << format_double(seconds[k]) << '\n';
  }
  check_stream(out);
}

void write_band_csv(std::ostream& out, const std::vector<BandRow>& rows,
                    const std::vector<std::string>& channels) {
  out << "t,channel,tau_pred,tau_meas,lo,hi\n";
  for (const BandRow& r : rows) {
    for (std::size_t c = 0; c < channels.size(); ++c) {
      const auto i = static_cast<Eigen::Index>(c);
      out << format_double(r.t) << ',' << channels[c] << ',' << format_double(r.predicted[i])
          << ',' << format_double(r.measured[i]) << ',' << format_double(r.lo[i]) << ','
          << format_double(r.hi[i]) << '\n';
    }
  }
  check_stream(out);
}

void write_parity_csv(std::ostream& out, const MatX& measured, const MatX& predicted,
                      const std::vector<std::string>& channels) {
  out << "channel,measured,predicted\n";
  for (int c = 0; c < measured.cols(); ++c) {
    for (int k = 0; k < measured.rows(); ++k) {
      out << channels[c] << ',' << format_double(measured(k, c)) << ','
          << format_double(predicted(k, c)) << '\n';
    }
  }
  check_stream(out);
}

namespace {

Json metrics_object(const MetricReport& report) {
  Json channels = Json::object();
  for (const ChannelMetrics& c : report.channels) {
    Json m;
    m["r2"] = c.r2 ? Json(*c.r2) : Json(nullptr);
    m["slope"] = c.slope;
    m["mse"] = c.mse;
    m["mae"] = c.mae;
    m["rmse"] = c.rmse;
    m["mean_error"] = c.mean_error;
    m["count"] = c.count;
    channels[c.name] = m;
  }
  return channels;
}

}  // namespace

std::string metrics_json(const MetricReport& report) {
  Json j;
  j["channels"] = metrics_object(report);
  return j.dump(2) + "\n";
}

MetricReport metrics_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("malformed metrics JSON: ") + e.what());
  }
  if (!j.contains("channels") || !j.at("channels").is_object()) {
    throw DataError("metrics JSON lacks a 'channels' object");
  }
  MetricReport report;
  for (const auto& [name, m] : j.at("channels").items()) {
    ChannelMetrics c;
    c.name = name;
    if (!m.at("r2").is_null()) c.r2 = m.at("r2").get<double>();
    c.slope = m.at("slope").get<double>();
    c.mse = m.at("mse").get<double>();
    c.mae = m.at("mae").get<double>();
    c.rmse = m.at("rmse").get<double>();
    c.mean_error = m.at("mean_error").get<double>();
    c.count = m.at("count").get<int>();
    report.channels.push_back(std::move(c));
  }
  return report;
}

std::string comparison_json(const ComparisonReport& report) {
  Json j;
  j["fixed"] = metrics_object(report.fixed);
  j["adaptive"] = metrics_object(report.adaptive);
  Json deltas = Json::object();
  for (std::size_t c = 0; c < report.names.size(); ++c) {
    Json d;
    d["mae"] = report.delta_mae[static_cast<Eigen::Index>(c)];
    d["rmse"] = report.delta_rmse[static_cast<Eigen::Index>(c)];
    d["mean_error"] = report.delta_mean_error[static_cast<Eigen::Index>(c)];
    deltas[report.names[c]] = d;
  }
  j["delta"] = deltas;
  return j.dump(2) + "\n";
}

std::string parameters_json(const VecX& pi, int num_links) {
  Json j;
  j["pi"] = array_of(pi);
  Json names = Json::array();
  for (int i = 0; i < pi.size(); ++i) names.push_back(param::name(i, num_links));
  j["names"] = names;
  return j.dump(2) + "\n";
}

VecX parameters_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw DataError(std::string("malformed parameter JSON: ") + e.what());
  }
  if (j.is_object()) {
    if (j.contains("pi")) {
      j = j.at("pi");
    } else if (j.contains("pi_true")) {
      j = j.at("pi_true");
    } else {
      throw DataError("parameter JSON lacks 'pi'");
    }
  }
  if (!j.is_array()) throw DataError("parameter JSON must hold an array");
  VecX v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError("parameter JSON holds a non-number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

// --- YAML -------------------------------------------------------------------

namespace {

[[noreturn]] void yaml_fail(const YAML::Node& node, const std::string& what) {
  const YAML::Mark m = node.Mark();
  std::string where = m.is_null() ? "" : "line " + std::to_string(m.line + 1) + ": ";
  throw ConfigError(where + what);
}

double yaml_number(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    yaml_fail(node, "'" + key + "' must be a number");
  }
}

double yaml_number(const YAML::Node& parent, const std::string& key, double fallback) {
  const YAML::Node n = parent[key];
  return n ? yaml_number(n, key) : fallback;
}

VecX yaml_vector(const YAML::Node& node, const std::string& key, int expected) {
  if (!node.IsSequence()) yaml_fail(node, "'" + key + "' must be a list");
  if (expected >= 0 && static_cast<int>(node.size()) != expected) {
    yaml_fail(node, "'" + key + "' needs " + std::to_string(expected) + " entries");
  }
  VecX v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = yaml_number(node[i], key);
  }
  return v;
}

VecX yaml_vector(const YAML::Node& parent, const std::string& key, int expected,
                 const VecX& fallback) {
  const YAML::Node n = parent[key];
  return n ? yaml_vector(n, key, expected) : fallback;
}

/// 3x3 or 6x6 matrix as nested lists; a flat list is read as the diagonal.
MatX yaml_matrix(const YAML::Node& node, const std::string& key, int dim) {
  if (!node.IsSequence()) yaml_fail(node, "'" + key + "' must be a list");
  if (node.size() > 0 && !node[0].IsSequence()) {
    return yaml_vector(node, key, dim).asDiagonal();
  }
  if (static_cast<int>(node.size()) != dim) {
    yaml_fail(node, "'" + key + "' must have " + std::to_string(dim) + " rows");
  }
  MatX m(dim, dim);
  for (int r = 0; r < dim; ++r) m.row(r) = yaml_vector(node[r], key, dim).transpose();
  return m;
}

const YAML::Node require(const YAML::Node& parent, const std::string& key) {
  const YAML::Node n = parent[key];
  if (!n) yaml_fail(parent, "missing key '" + key + "'");
  return n;
}

SpatialInertia yaml_inertia(const YAML::Node& node) {
  const double mass = yaml_number(require(node, "mass"), "mass");
  if (node["com"]) {
    const Vec3 com = yaml_vector(node["com"], "com", 3);
    const Mat3 ic = yaml_matrix(require(node, "inertia_com"), "inertia_com", 3);
    return SpatialInertia::FromMassComInertia(mass, com, ic);
  }
  const Vec3 h = yaml_vector(node, "first_moment", 3, Vec3::Zero());
  const Mat3 inertia = yaml_matrix(require(node, "inertia"), "inertia", 3);
  return SpatialInertia::FromParameters(mass, h, inertia);
}

LinkHydrodynamics yaml_hydro(const YAML::Node& node) {
  LinkHydrodynamics h;
  if (!node) return h;
  if (node["added_mass"]) h.added_mass = yaml_matrix(node["added_mass"], "added_mass", 6);
  h.linear_drag = yaml_vector(node, "linear_drag", 6, Vec6::Zero());
  h.quadratic_drag = yaml_vector(node, "quadratic_drag", 6, Vec6::Zero());
  h.buoyancy = yaml_number(node, "buoyancy", 0.0);
  h.center_of_buoyancy = yaml_vector(node, "center_of_buoyancy", 3, Vec3::Zero());
  return h;
}

// Shortest round-trip text, with -0 written as 0.
std::string num(double v) { return format_double(v == 0.0 ? 0.0 : v); }

void emit_vector(YAML::Emitter& e, const VecX& v) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < v.size(); ++i) e << num(v[i]);
  e << YAML::EndSeq;
}

void emit_matrix(YAML::Emitter& e, const MatX& m) {
  e << YAML::BeginSeq;
  for (int r = 0; r < m.rows(); ++r) emit_vector(e, m.row(r).transpose());
  e << YAML::EndSeq;
}

void emit_inertia(YAML::Emitter& e, const SpatialInertia& inertia) {
  e << YAML::BeginMap;
  e << YAML::Key << "mass" << YAML::Value << num(inertia.mass());
  e << YAML::Key << "first_moment" << YAML::Value;
  emit_vector(e, inertia.first_moment());
  e << YAML::Key << "inertia" << YAML::Value;
  emit_matrix(e, inertia.rotational_inertia());
  e << YAML::EndMap;
}

void emit_hydro(YAML::Emitter& e, const LinkHydrodynamics& h) {
  e << YAML::BeginMap;
  e << YAML::Key << "added_mass" << YAML::Value;
  emit_matrix(e, h.added_mass);
  e << YAML::Key << "linear_drag" << YAML::Value;
  emit_vector(e, h.linear_drag);
  e << YAML::Key << "quadratic_drag" << YAML::Value;
  emit_vector(e, h.quadratic_drag);
  e << YAML::Key << "buoyancy" << YAML::Value << num(h.buoyancy);
  e << YAML::Key << "center_of_buoyancy" << YAML::Value;
  emit_vector(e, h.center_of_buoyancy);
  e << YAML::EndMap;
}

YAML::Node load_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed YAML: ") + e.what());
  }
}

}  // namespace

UvmsModel model_from_yaml(const std::string& text) {
  const YAML::Node root = load_yaml(text);
  if (!root.IsMap()) throw ConfigError("model file must be a YAML mapping");
  UvmsModel model;
  model.gravity = yaml_number(root, "gravity", 9.81);
  if (const YAML::Node b = root["weight_bounds"]) {
    const VecX wb = yaml_vector(b, "weight_bounds", 2);
    model.bounds = {wb[0], wb[1]};
  }

  const YAML::Node v = require(root, "vehicle");
  model.vehicle.rigid_inertia = yaml_inertia(require(v, "rigid_body"));
  model.vehicle.cg = yaml_vector(v, "cg", 3, Vec3::Zero());
  model.vehicle.weight = yaml_number(require(v, "weight"), "weight");
  model.vehicle.hydro = yaml_hydro(v["hydro"]);

  std::vector<std::string> names;
  if (const YAML::Node links = root["links"]) {
    if (!links.IsSequence()) yaml_fail(links, "'links' must be a list");
    for (const YAML::Node& ln : links) {
      Link link;
      link.name = ln["name"] ? ln["name"].as<std::string>() : "link" + std::to_string(names.size() + 1);
      JointDescriptor& j = link.joint;
      j.axis = yaml_vector(require(ln, "axis"), "axis", 6);
      const YAML::Node parent = ln["parent"];
      if (!parent || parent.as<std::string>() == "vehicle") {
        j.parent = kVehicle;
      } else {
        const std::string p = parent.as<std::string>();
        const auto it = std::find(names.begin(), names.end(), p);
        if (it == names.end()) yaml_fail(parent, "unknown parent link '" + p + "'");
        j.parent = static_cast<int>(it - names.begin());
      }
      const Vec3 offset = yaml_vector(ln, "offset", 3, Vec3::Zero());
      const Vec3 rpy = yaml_vector(ln, "rpy", 3, Vec3::Zero());
      j.placement = PluckerTransform(rpy_rotation(rpy[0], rpy[1], rpy[2]).transpose(), offset);
      j.gear_ratio = yaml_number(ln, "gear_ratio", 1.0);
      j.viscous_friction = yaml_number(ln, "viscous_friction", 0.0);
      j.static_friction = yaml_number(ln, "static_friction", 0.0);
      if (const YAML::Node rotor = ln["rotor"]) j.rotor_inertia = yaml_inertia(rotor);
      link.inertia = yaml_inertia(require(ln, "inertia"));
      link.hydro = yaml_hydro(ln["hydro"]);
      names.push_back(link.name);
      model.links.push_back(std::move(link));
    }
  }
  try {
    model.validate();
  } catch (const ModelError& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
  return model;
}

std::string model_to_yaml(const UvmsModel& model) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "gravity" << YAML::Value << num(model.gravity);
  e << YAML::Key << "weight_bounds" << YAML::Value << YAML::Flow << YAML::BeginSeq
    << num(model.bounds.w_min) << num(model.bounds.w_max) << YAML::EndSeq;
  e << YAML::Key << "vehicle" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "rigid_body" << YAML::Value;
  emit_inertia(e, model.vehicle.rigid_inertia);
  e << YAML::Key << "cg" << YAML::Value;
  emit_vector(e, model.vehicle.cg);
  e << YAML::Key << "weight" << YAML::Value << num(model.vehicle.weight);
  e << YAML::Key << "hydro" << YAML::Value;
  emit_hydro(e, model.vehicle.hydro);
  e << YAML::EndMap;
  e << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const Link& link : model.links) {
    const JointDescriptor& j = link.joint;
    e << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << link.name;
    e << YAML::Key << "parent" << YAML::Value
      << (j.parent == kVehicle ? std::string("vehicle") : model.links[j.parent].name);
    e << YAML::Key << "axis" << YAML::Value;
    emit_vector(e, j.axis);
    e << YAML::Key << "offset" << YAML::Value;
    emit_vector(e, j.placement.translation());
    const Mat3 r = j.placement.rotation().transpose();
    const Vec3 rpy(std::atan2(r(2, 1), r(2, 2)), std::asin(std::clamp(-r(2, 0), -1.0, 1.0)),
                   std::atan2(r(1, 0), r(0, 0)));
    e << YAML::Key << "rpy" << YAML::Value;
    emit_vector(e, rpy);
    e << YAML::Key << "gear_ratio" << YAML::Value << num(j.gear_ratio);
    e << YAML::Key << "viscous_friction" << YAML::Value << num(j.viscous_friction);
    e << YAML::Key << "static_friction" << YAML::Value << num(j.static_friction);
    if (j.rotor_inertia.mass() != 0.0 || !j.rotor_inertia.matrix().isZero()) {
      e << YAML::Key << "rotor" << YAML::Value;
      emit_inertia(e, j.rotor_inertia);
    }
    e << YAML::Key << "inertia" << YAML::Value;
    emit_inertia(e, link.inertia);
    if (!link.hydro.is_zero()) {
      e << YAML::Key << "hydro" << YAML::Value;
      emit_hydro(e, link.hydro);
    }
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

namespace {

std::vector<int> yaml_targets(const YAML::Node& node, int num_links) {
  std::vector<int> out;
  if (!node.IsSequence()) yaml_fail(node, "'targets' must be a list");
  static const char* kDof[] = {"surge", "sway", "heave", "roll", "pitch", "yaw"};
  for (const YAML::Node& t : node) {
    const std::string s = t.as<std::string>();
    int index = -1;
    for (int d = 0; d < 6; ++d) {
      if (s == kDof[d]) index = d;
    }
    if (s.rfind("joint", 0) == 0) {
      try {
        index = 5 + std::stoi(s.substr(5));
      } catch (const std::exception&) {
        index = -1;
      }
    }
    if (index < 0 || index >= 6 + num_links) yaml_fail(t, "unknown target '" + s + "'");
    out.push_back(index);
  }
  return out;
}

std::vector<int> yaml_indices(const YAML::Node& node, const std::string& key) {
  std::vector<int> out;
  if (!node.IsSequence()) yaml_fail(node, "'" + key + "' must be a list");
  for (const YAML::Node& n : node) {
    if (n.IsSequence() && n.size() == 2) {
      // [first, last] inclusive range
      const int a = n[0].as<int>(), b = n[1].as<int>();
      for (int i = a; i <= b; ++i) out.push_back(i);
    } else {
      out.push_back(n.as<int>());
    }
  }
  return out;
}

}  // namespace

ExperimentSchedule schedule_from_yaml(const std::string& text, int num_links) {
  const YAML::Node root = load_yaml(text);
  if (!root.IsMap()) throw ConfigError("schedule file must be a YAML mapping");
  ExperimentSchedule out;
  const double duration = yaml_number(root, "duration", 40.0);
  const auto seed = static_cast<std::uint64_t>(yaml_number(root, "excitation_seed", 0.0));
  out.rest_joints = yaml_vector(root, "rest_joints", num_links, VecX::Zero(num_links));
  out.duration = duration;
  if (!(duration >= 0.0)) throw ConfigError("schedule: duration must be non-negative");

  try {
    if (const YAML::Node preset = root["preset"]) {
      const std::string p = preset.as<std::string>();
      if (p == "staged") {
        out.excitation = default_excitation(num_links, duration, seed);
        out.stages = default_stage_schedule(num_links);
      } else if (p == "full") {
        out.excitation = full_excitation(num_links, duration, seed);
      } else {
        yaml_fail(preset, "unknown preset '" + p + "'");
      }
    }
    if (const YAML::Node ex = root["excitation"]) {
      out.excitation = {};
      out.excitation.seed = seed;
      for (const YAML::Node& s : ex) {
        ExcitationStage st;
        st.name = s["name"] ? s["name"].as<std::string>() : "";
        const VecX window = yaml_vector(require(s, "window"), "window", 2);
        st.t0 = window[0];
        st.t1 = window[1];
        st.targets = yaml_targets(require(s, "targets"), num_links);
        st.waveform = waveform_from_string(s["waveform"] ? s["waveform"].as<std::string>()
                                                        : std::string("multisine"));
        st.amplitude = yaml_number(require(s, "amplitude"), "amplitude");
        if (const YAML::Node band = s["band"]) {
          const VecX b = yaml_vector(band, "band", 2);
          st.f_lo = b[0];
          st.f_hi = b[1];
        }
        out.excitation.stages.push_back(std::move(st));
      }
    }
    if (const YAML::Node stages = root["stages"]) {
      out.stages = {};
      if (stages.IsScalar() && stages.as<std::string>() == "none") {
        // all parameters active throughout
      } else {
        for (const YAML::Node& s : stages) {
          StageWindow w;
          w.name = s["name"] ? s["name"].as<std::string>() : "";
          const VecX window = yaml_vector(require(s, "window"), "window", 2);
          w.t0 = window[0];
          w.t1 = window[1];
          w.parameters = yaml_indices(require(s, "parameters"), "parameters");
          w.rows = yaml_indices(require(s, "rows"), "rows");
          out.stages.windows.push_back(std::move(w));
        }
      }
    }
    out.excitation.validate(num_links);
    out.stages.validate(param::count(num_links), 6 + num_links);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace uvms::io
