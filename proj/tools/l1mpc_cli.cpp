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

// l1mpc: run one closed-loop experiment or the full sweep.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "l1mpc/experiment.hpp"

namespace {

l1mpc::LabConfig config_or_default(const std::string& path) {
  return path.empty() ? l1mpc::LabConfig{} : l1mpc::load_config(path);
}

void print_metrics(const l1mpc::RunMetrics& m) {
  std::printf("group=%s controller=%s period=%g pos_rmse=%.6f quat_rmse=%.6f "
              "mean_solve_ms=%.3f max_solve_ms=%.3f saturations=%d/%d backup=%d%s%s\n",
              std::string(l1mpc::to_string(m.group)).c_str(),
              std::string(l1mpc::to_string(m.controller)).c_str(), m.period, m.pos_rmse,
              m.quat_rmse, m.mean_solve_ms, m.max_solve_ms, m.wrench_saturations,
              m.rotor_saturations, m.backup_engagements, m.failed ? " FAILED: " : "",
              m.failure.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L1-adaptive NMPC flight-control lab"};
  app.require_subcommand(1);

  std::string group = "A", controller = "nominal", config_path, out_path, out_dir;
  double period = 15.0, duration = 0.0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run one closed-loop experiment");
  run->add_option("--group", group, "Plant group")
      ->check(CLI::IsMember({"A", "B", "C", "D", "a", "b", "c", "d"}));
  run->add_option("--controller", controller, "Controller")
      ->check(CLI::IsMember({"nominal", "l1", "ekf", "pid"}));
  run->add_option("--period", period, "Trajectory period [s]")->check(CLI::PositiveNumber);
  run->add_option("--duration", duration, "Run length [s] (default: one period)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Per-run CSV output path");
  run->add_option("--seed", seed, "Run seed (mixed with sim.seed)");

  auto* sw = app.add_subcommand("sweep", "Run the group x period x controller matrix");
  sw->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  sw->add_option("--out-dir", out_dir, "Output directory")->required();

  auto* dump = app.add_subcommand("dump-config", "Print the effective configuration");
  dump->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const l1mpc::LabConfig cfg = config_or_default(config_path);
    if (*run) {
      l1mpc::ExperimentSpec spec;
      spec.group = l1mpc::parse_group(group);
      spec.controller = l1mpc::parse_controller(controller);
      spec.period = period;
      spec.duration = duration > 0.0 ? duration : period;
      spec.seed = seed;
      spec.output_path = out_path;
      const l1mpc::RunResult r = l1mpc::run_experiment_to_file(spec, cfg);
      print_metrics(r.metrics);
      return r.metrics.failed ? 1 : 0;
    }
    if (*sw) {
      const l1mpc::SweepResult r = l1mpc::sweep(cfg, out_dir);
      for (const auto& row : r.rows) print_metrics(row.metrics);
      std::printf("%zu runs, %d failed; summary in %s/summary.csv\n", r.rows.size(), r.failures,
                  out_dir.c_str());
      return r.failures > 0 ? 1 : 0;
    }
    if (*dump) {
      std::cout << l1mpc::dump_config(cfg) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
