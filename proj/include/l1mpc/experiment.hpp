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

#ifndef L1MPC_EXPERIMENT_HPP_
#define L1MPC_EXPERIMENT_HPP_

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "l1mpc/config.hpp"

namespace l1mpc {

struct ExperimentSpec {
  Group group = Group::kA;
  ControllerKind controller = ControllerKind::kNominal;
  double period = 15.0;    // s, trajectory period
  double duration = 15.0;  // s
  std::uint64_t seed = 0;
  std::string output_path;  // per-run CSV; empty for none

  void validate() const;
};

struct RunMetrics {
  Group group = Group::kA;
  ControllerKind controller = ControllerKind::kNominal;
  double period = 0.0;

  bool failed = false;
  std::string failure;
  double pos_rmse = 0.0;
  double quat_rmse = 0.0;
  Vec3d pos_axis_rmse = Vec3d::Zero();
  double z_error_mean = 0.0;  // mean of p_ref,z - p_z
  double z_error_sem = 0.0;   // its standard error (std / √n)
  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
  int solves = 0;
  int degraded_solves = 0;
  int wrench_saturations = 0;  // envelope clamp hits
  int rotor_saturations = 0;   // rotor speed clamp hits
  int backup_engagements = 0;
  int backup_steps = 0;
  int control_steps = 0;
  int plant_steps = 0;
};

// Per-control-step samples kept in memory for analysis.
struct TraceSample {
  double t = 0.0;
  Vec3d pos_error = Vec3d::Zero();
  Vec3d att_error = Vec3d::Zero();
  Vec6d wrench = Vec6d::Zero();            // commanded
  Vec6d estimate = Vec6d::Zero();          // σ̂ (L1) or (f, τ)_EKF
  Vec6d u_l1 = Vec6d::Zero();
  Vec6d true_disturbance = Vec6d::Zero();  // ℬ⁻¹(ż_plant - ż_model)
  bool backup = false;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<TraceSample> trace;
};

/// sqrt(mean ‖e‖²). Throws std::invalid_argument on empty input.
template <class Vec>
double rmse(const std::vector<Vec>& errors) {
  if (errors.empty()) throw std::invalid_argument("rmse of an empty sequence");
  double acc = 0.0;
  for (const auto& e : errors) acc += e.squaredNorm();
  return std::sqrt(acc / static_cast<double>(errors.size()));
}

/// Header of the per-run CSV.
std::string csv_header();

/// Closed loop: controller at 1/control_period, plant at plant_substeps per
/// control step. Writes one CSV row per control step to `csv` if given.
RunResult run_experiment(const ExperimentSpec& spec, const LabConfig& cfg,
                         std::ostream* csv = nullptr);

/// Same, writing the CSV to spec.output_path when set.
RunResult run_experiment_to_file(const ExperimentSpec& spec, const LabConfig& cfg);

/// 100·(1 - adaptive/nominal).
double reduction_percent(double adaptive, double nominal);

struct SummaryRow {
  RunMetrics metrics;
  // Reductions relative to the nominal MPC of the same group and period;
  // NaN when that cell is missing or failed.
  double pos_reduction = NAN;
  double quat_reduction = NAN;
};

std::vector<SummaryRow> summarize(const std::vector<RunMetrics>& runs);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

struct SweepResult {
  std::vector<SummaryRow> rows;
  int failures = 0;
};

/// Runs cfg.sweep's groups × periods × controllers. Per-run CSVs and
/// summary.csv go to out_dir (created if needed). Failed runs are recorded
/// and the sweep continues.
SweepResult sweep(const LabConfig& cfg, const std::string& out_dir);

}  // namespace l1mpc

#endif  // L1MPC_EXPERIMENT_HPP_
