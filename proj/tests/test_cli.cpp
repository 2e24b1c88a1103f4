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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "uvms/io.hpp"

namespace uvms {
namespace {

namespace fs = std::filesystem;

const fs::path& work() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("uvms_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(UVMS_ID_BIN) + " " + args + " > " +
                          (work() / "last.log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return io::read_file(p.string()); }

std::string last_log() { return slurp(work() / "last.log"); }

/// Writes a schedule and a run configuration that points at the shipped model.
fs::path config(const std::string& name, double duration, const std::string& extra = "") {
  const fs::path sched = work() / (name + "_schedule.yaml");
  std::ofstream(sched) << "preset: full\nduration: " << duration
                       << "\nexcitation_seed: 3\nstages: none\nrest_joints: [0, 0.4, -0.8, 0]\n";
  const fs::path cfg = work() / (name + ".yaml");
  std::ofstream(cfg) << "model_path: " << UVMS_CONFIG_DIR << "/reference_model.yaml\n"
                     << "schedule_path: " << sched.filename().string() << "\n"
                     << "seed: 4\noutput_dir: " << name << "_out\n"
                     << "simulation:\n  noise_std: 0.01\n"
                     << "estimator:\n  staged: false\n"
                     << "identification:\n  initial_perturbation: 0.1\n  band_level: 0.95\n"
                     << extra;
  return cfg;
}

std::string flags(const fs::path& cfg, const fs::path& out) {
  return "--config " + cfg.string() + " --out " + out.string();
}

TEST(Cli, ZeroDurationWritesEmptyLog) {
  const fs::path cfg = config("zero", 0.0);
  const fs::path out = work() / "zero";
  ASSERT_EQ(run("simulate " + flags(cfg, out)), 0) << last_log();
  EXPECT_TRUE(slurp(out / "telemetry.jsonl").empty());
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest.at("seed").get<int>(), 4);
  EXPECT_FALSE(manifest.at("config_hash").get<std::string>().empty());

  EXPECT_EQ(run("identify " + flags(cfg, work() / "zero_id") + " --data " +
                (out / "telemetry.jsonl").string()),
            2);
  EXPECT_NE(last_log().find("no samples"), std::string::npos) << last_log();
}

TEST(Cli, SimulateIsDeterministicPerSeed) {
  const fs::path cfg = config("det", 1.0);
  ASSERT_EQ(run("simulate " + flags(cfg, work() / "det_a")), 0) << last_log();
  ASSERT_EQ(run("simulate " + flags(cfg, work() / "det_b")), 0) << last_log();
  ASSERT_EQ(run("simulate " + flags(cfg, work() / "det_c") + " --seed 5"), 0) << last_log();
  const std::string a = slurp(work() / "det_a" / "telemetry.jsonl");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(work() / "det_b" / "telemetry.jsonl"));
  EXPECT_NE(a, slurp(work() / "det_c" / "telemetry.jsonl"));
  EXPECT_EQ(slurp(work() / "det_a" / "manifest.json"), slurp(work() / "det_b" / "manifest.json"));
}

TEST(Cli, IdentifyEvaluateCompare) {
  const fs::path cfg = config("pipe", 2.0);
  const fs::path sim = work() / "pipe_sim";
  ASSERT_EQ(run("simulate " + flags(cfg, sim)), 0) << last_log();
  const std::string data = (sim / "telemetry.jsonl").string();
  const std::string truth = (sim / "ground_truth.jsonl").string();

  const fs::path id = work() / "pipe_id";
  ASSERT_EQ(run("identify " + flags(cfg, id) + " --data " + data + " --truth " + truth +
                " --horizon 30 --huber-scope element"),
            0)
      << last_log();
  for (const char* f : {"parameter_trace.csv", "uncertainty_trace.csv", "solve_times.csv",
                        "parameters.json", "online_bands.csv", "summary.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(id / f)) << f;
  }
  const auto summary = nlohmann::json::parse(slurp(id / "summary.json"));
  EXPECT_EQ(summary.at("samples").get<int>(), 100);
  EXPECT_GE(summary.at("solve_time_s").at("p90").get<double>(),
            summary.at("solve_time_s").at("median").get<double>());

  ASSERT_EQ(run("identify " + flags(cfg, work() / "pipe_id2") + " --data " + data + " --truth " +
                truth + " --horizon 30 --huber-scope element"),
            0);
  EXPECT_EQ(slurp(id / "parameter_trace.csv"), slurp(work() / "pipe_id2" / "parameter_trace.csv"));

  // The clean inverse dynamics under the truth reproduce the joint channels up to noise.
  const fs::path ev = work() / "pipe_eval";
  ASSERT_EQ(run("evaluate " + flags(cfg, ev) + " --data " + data + " --params " + truth), 0)
      << last_log();
  const MetricReport metrics = io::metrics_from_json(slurp(ev / "metrics.json"));
  for (int j = 1; j <= 4; ++j) {
    EXPECT_GT(*metrics.channel("joint" + std::to_string(j)).r2, 0.99) << j;
  }
  EXPECT_TRUE(fs::exists(ev / "parity.csv"));
  EXPECT_TRUE(fs::exists(ev / "bands.csv"));

  const fs::path cmp = work() / "pipe_cmp";
  ASSERT_EQ(run("compare " + flags(cfg, cmp) + " --data " + data + " --fixed " +
                (id / "parameters.json").string() + " --trace " +
                (id / "parameter_trace.csv").string()),
            0)
      << last_log();
  const auto comparison = nlohmann::json::parse(slurp(cmp / "comparison.json"));
  EXPECT_FALSE(comparison.empty());
}

TEST(Cli, ExitCodes) {
  const fs::path cfg = config("codes", 1.0);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("simulate --config " + (work() / "missing.yaml").string()), 1);
  EXPECT_EQ(run("simulate --config " + cfg.string() + " --bogus"), 1);

  const fs::path bad = work() / "bad.jsonl";
  std::ofstream(bad) << "{\"t\": 0}\n";
  EXPECT_EQ(run("identify " + flags(cfg, work() / "codes_id") + " --data " + bad.string()), 2);
  EXPECT_NE(last_log().find("line 1"), std::string::npos) << last_log();
  EXPECT_EQ(run("identify " + flags(cfg, work() / "codes_id") + " --data " + bad.string() +
                " --alpha 2"),
            1);

  const fs::path sim = work() / "codes_sim";
  ASSERT_EQ(run("simulate " + flags(cfg, sim)), 0);
  // A log from a two-link arm does not fit the four-link model.
  std::vector<TelemetryRecord> records;
  {
    std::ifstream in(sim / "telemetry.jsonl");
    records = io::read_telemetry(in);
  }
  for (TelemetryRecord& r : records) {
    r.state.mu.conservativeResize(2);
    r.state.mu_dot.conservativeResize(2);
    r.state.mu_ddot.conservativeResize(2);
    r.tau.tau_m.conservativeResize(2);
  }
  const fs::path two = work() / "two_link.jsonl";
  {
    std::ofstream out(two);
    io::write_telemetry(out, records);
  }
  EXPECT_EQ(run("evaluate " + flags(cfg, work() / "codes_eval") + " --data " + two.string() +
                " --params " + (sim / "ground_truth.jsonl").string()),
            2)
      << last_log();
}

}  // namespace
}  // namespace uvms
