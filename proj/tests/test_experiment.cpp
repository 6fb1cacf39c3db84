// Copyright 2026 The l1mpc Authors
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


#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "l1mpc/experiment.hpp"

namespace l1mpc {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("l1mpc_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

TEST(Trajectory, UnitQuaternionEverywhere) {
  const TrajectorySpec spec;
  for (double t = 0.0; t < 30.0; t += 0.0137) {
    EXPECT_NEAR(reference(t, spec).q.norm(), 1.0, 1e-12);
  }
}

TEST(Trajectory, DerivativesMatchFiniteDifferences) {
  TrajectorySpec spec;
  spec.position_phase = Vec3d(0.1, 0.2, 0.3);
  spec.attitude_phase = Vec3d(0.4, 0.5, 0.6);
  const double h = 1e-5;
  for (double t = 0.05; t < 15.0; t += 0.731) {
    const TrajectorySample a = sample_trajectory(t - h, spec);
    const TrajectorySample s = sample_trajectory(t, spec);
    const TrajectorySample b = sample_trajectory(t + h, spec);
    EXPECT_LT((s.ref.v - (b.ref.p - a.ref.p) / (2 * h)).norm(), 1e-7);
    EXPECT_LT((s.accel - (b.ref.v - a.ref.v) / (2 * h)).norm(), 1e-7);
    const Quatd q_dot = (b.ref.q - a.ref.q) / (2 * h);
    const Vec3d w_fd = 2.0 * quat_mul(quat_inverse(s.ref.q), q_dot).tail<3>();
    EXPECT_LT((s.ref.w - w_fd).norm(), 1e-7);
    EXPECT_LT((s.ang_accel - (b.ref.w - a.ref.w) / (2 * h)).norm(), 1e-7);
  }
}

TEST(Trajectory, PeriodicAndStartsOnPose) {
  const TrajectorySpec spec;
  const ReferencePoint r0 = reference(0.0, spec);
  EXPECT_LT((r0.p - Vec3d(0, 0, spec.z0)).norm(), 1e-12);
  for (double t = 0.0; t < 15.0; t += 1.3) {
    const ReferencePoint a = reference(t, spec);
    const ReferencePoint b = reference(t + spec.period, spec);
    EXPECT_LT((a.p - b.p).norm(), 1e-9);
    EXPECT_LT(quat_error(a.q, b.q).norm(), 1e-9);
  }
  const ReferenceWindow w = reference_window(1.0, 0.05, 20, spec);
  ASSERT_EQ(w.size(), 21u);
  EXPECT_LT((w[20].p - reference(2.0, spec).p).norm(), 1e-12);
}

TEST(Trajectory, ValidationRejectsNinetyDegrees) {
  TrajectorySpec spec;
  spec.attitude_amplitude(1) = M_PI / 2.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = TrajectorySpec{};
  spec.period = 0.0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Metrics, Rmse) {
  EXPECT_EQ(rmse(std::vector<Vec3d>(5, Vec3d::Zero())), 0.0);
  EXPECT_NEAR(rmse(std::vector<Vec3d>(7, Vec3d(1, 2, 2))), 3.0, 1e-15);
  EXPECT_NEAR(rmse(std::vector<Vec3d>{Vec3d(3, 0, 0), Vec3d(0, 4, 0)}), std::sqrt(12.5), 1e-15);
  EXPECT_THROW(rmse(std::vector<Vec3d>{}), std::invalid_argument);
}

TEST(Metrics, ReductionPercent) {
  EXPECT_DOUBLE_EQ(reduction_percent(0.1, 1.0), 90.0);
  EXPECT_DOUBLE_EQ(reduction_percent(0.5, 1.0), 50.0);
  EXPECT_DOUBLE_EQ(reduction_percent(2.0, 1.0), -100.0);

  std::vector<RunMetrics> runs(3);
  runs[0].controller = ControllerKind::kNominal;
  runs[0].pos_rmse = 0.2;
  runs[0].quat_rmse = 0.04;
  runs[1].controller = ControllerKind::kL1;
  runs[1].pos_rmse = 0.02;
  runs[1].quat_rmse = 0.01;
  runs[2].controller = ControllerKind::kEkf;
  runs[2].group = Group::kB;  // no nominal cell for B
  runs[2].pos_rmse = 0.1;
  for (auto& r : runs) r.period = 15.0;
  const std::vector<SummaryRow> rows = summarize(runs);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[1].pos_reduction, 90.0, 1e-12);
  EXPECT_NEAR(rows[1].quat_reduction, 75.0, 1e-12);
  EXPECT_TRUE(std::isnan(rows[2].pos_reduction));
}

class ExperimentTest : public ::testing::Test {
 protected:
  LabConfig cfg;
  void SetUp() override { cfg.sim.record_timing = false; }
};

TEST_F(ExperimentTest, StepCountContractAndShortRun) {
  ExperimentSpec spec;
  spec.duration = 1.0;
  const RunResult r = run_experiment(spec, cfg);
  EXPECT_FALSE(r.metrics.failed) << r.metrics.failure;
  EXPECT_EQ(r.metrics.control_steps, 100);
  EXPECT_EQ(r.metrics.plant_steps, 10 * r.metrics.control_steps);
  EXPECT_EQ(r.trace.size(), 100u);
  EXPECT_LT(r.metrics.pos_rmse, 0.05);
}

TEST_F(ExperimentTest, CsvIsByteIdenticalAcrossRuns) {
  for (ControllerKind c : {ControllerKind::kL1, ControllerKind::kEkf, ControllerKind::kPid}) {
    ExperimentSpec spec;
    spec.group = Group::kD;
    spec.controller = c;
    spec.duration = 0.5;
    std::ostringstream a, b;
    run_experiment(spec, cfg, &a);
    run_experiment(spec, cfg, &b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(line_count(a.str()), 51);
    EXPECT_EQ(a.str().substr(0, csv_header().size()), csv_header());
  }
}

TEST_F(ExperimentTest, MatchedPlantIsBestNominalCell) {
  double rmse_a = 0.0;
  for (Group g : {Group::kA, Group::kB, Group::kC, Group::kD}) {
    ExperimentSpec spec;
    spec.group = g;
    const RunResult r = run_experiment(spec, cfg);
    ASSERT_FALSE(r.metrics.failed) << r.metrics.failure;
    if (g == Group::kA) {
      rmse_a = r.metrics.pos_rmse;
      EXPECT_LT(rmse_a, 0.05);
    } else {
      EXPECT_LE(rmse_a, r.metrics.pos_rmse) << to_string(g);
    }
  }
}

TEST_F(ExperimentTest, DivergenceMarksRunFailed) {
  cfg.sim.divergence_bound = 1e-9;
  ExperimentSpec spec;
  spec.group = Group::kD;
  spec.duration = 1.0;
  const RunResult r = run_experiment(spec, cfg);
  EXPECT_TRUE(r.metrics.failed);
  EXPECT_FALSE(r.metrics.failure.empty());
  EXPECT_LT(r.metrics.control_steps, 100);
}

TEST_F(ExperimentTest, OneCellSweepGivesOneSummaryRow) {
  cfg.sweep.groups = {Group::kB};
  cfg.sweep.controllers = {ControllerKind::kNominal};
  cfg.sweep.periods = {20.0};
  cfg.sweep.duration = 0.3;
  const fs::path dir = scratch_dir("sweep");
  const SweepResult r = sweep(cfg, dir.string());
  EXPECT_EQ(r.failures, 0);
  ASSERT_EQ(r.rows.size(), 1u);
  const std::string summary = read_file(dir / "summary.csv");
  EXPECT_EQ(line_count(summary), 2);
  EXPECT_EQ(summary.rfind("group,period,controller,pos_rmse", 0), 0u);
  int csvs = 0;
  for (const auto& e : fs::directory_iterator(dir)) csvs += e.path().extension() == ".csv";
  EXPECT_EQ(csvs, 2);
}

TEST(Config, ParseRoundTripAndErrors) {
  const LabConfig def;
  const LabConfig back = parse_config(dump_config(def));
  EXPECT_EQ(dump_config(back), dump_config(def));

  const LabConfig c = parse_config(R"({
    // comments are allowed
    "vehicle": {"mass": 5.0},
    "l1": {"attitude_lookahead": false},
    "sweep": {"groups": ["B", "D"], "controllers": ["l1"], "periods": [20]}
  })");
  EXPECT_EQ(c.vehicle.mass, 5.0);
  EXPECT_FALSE(c.l1.attitude_lookahead);
  EXPECT_EQ(c.sweep.groups, (std::vector<Group>{Group::kB, Group::kD}));
  EXPECT_EQ(c.sweep.periods, std::vector<double>{20.0});
  EXPECT_EQ(c.solver.stages, def.solver.stages);

  EXPECT_THROW(parse_config(R"({"vehicle": {"mas": 5.0}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"vehicel": {}})"), std::invalid_argument);
  EXPECT_THROW(parse_config(R"({"vehicle": {"mass": -1.0}})"), std::invalid_argument);
  EXPECT_THROW(parse_config("{"), std::invalid_argument);
  EXPECT_THROW(parse_controller("lqr"), std::invalid_argument);
  EXPECT_EQ(parse_controller("l1-mpc"), ControllerKind::kL1);
}

TEST(Config, ShippedDefaultMatchesBuiltIn) {
  const LabConfig c = load_config(std::string(L1MPC_SOURCE_DIR) + "/configs/default.json");
  EXPECT_EQ(dump_config(c), dump_config(LabConfig{}));
}

// CLI exit codes.
int run_cli(const std::string& args) {
  const std::string cmd = std::string(L1MPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  const fs::path out = dir / "run.csv";
  EXPECT_EQ(run_cli("run --group D --controller l1 --period 15 --duration 0.2 --out " +
                    out.string()),
            0);
  EXPECT_EQ(line_count(read_file(out)), 21);
  EXPECT_NE(run_cli("run --group E"), 0);
  EXPECT_NE(run_cli("run --controller lqr"), 0);
  EXPECT_NE(run_cli(""), 0);

  const fs::path bad = dir / "diverge.json";
  std::ofstream(bad) << R"({"sim": {"divergence_bound": 1e-9}})";
  EXPECT_EQ(run_cli("run --group D --duration 0.2 --config " + bad.string()), 1);
  const fs::path invalid = dir / "invalid.json";
  std::ofstream(invalid) << R"({"sim": {"bogus": 1}})";
  EXPECT_EQ(run_cli("run --config " + invalid.string()), 2);
}

}  // namespace
}  // namespace l1mpc
