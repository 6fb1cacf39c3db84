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

#include "l1mpc/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <tuple>

namespace l1mpc {

namespace {

enum Flag : unsigned {
  kFlagBackup = 1u,
  kFlagWrenchSaturated = 2u,
  kFlagRotorSaturated = 4u,
  kFlagDegraded = 8u,
  kFlagSolveFailed = 16u,
};

// Clamps force and torque norms; returns true when either was scaled.
bool clamp_envelope(Vec6d& w, const PlantConfig& plant) {
  bool hit = false;
  const double fn = w.head<3>().norm();
  if (fn > plant.force_limit) {
    w.head<3>() *= plant.force_limit / fn;
    hit = true;
  }
  const double tn = w.tail<3>().norm();
  if (tn > plant.torque_limit) {
    w.tail<3>() *= plant.torque_limit / tn;
    hit = true;
  }
  return hit;
}

// Wrench the rotors actually produce for a commanded wrench. In mismatch
// mode the plant recovers rotor speed with a square root of the speeds
// normalized by omega_max, i.e. Ω ← Ω²/Ω_max.
Vec6d actuate(const Vec6d& w, const AllocationMatrices& mats, bool mismatch, bool& saturated) {
  ActuatorCommand cmd = allocate(w, mats);
  const ActuatorGeometry& g = mats.geometry;
  if (mismatch) {
    for (int i = 0; i < kNumRotors; ++i) {
      cmd.omega(i) = std::clamp(cmd.omega(i) * cmd.omega(i) / g.omega_max, g.omega_min,
                                g.omega_max);
    }
  }
  saturated = cmd.saturated;
  Vec6d out = Vec6d::Zero();
  for (int i = 0; i < kNumRotors; ++i) out += rotor_wrench(i, cmd.omega(i), cmd.tilt(i), g);
  return out;
}

// Nominal wrench that follows the reference's acceleration exactly.
Vec6d feedforward_wrench(const TrajectorySample& s, const VehicleParams& p) {
  const Quatd q_inv = quat_inverse(s.ref.q);
  Vec6d w;
  w.head<3>() = p.mass * rotate(Vec3d(s.accel - p.gravity), q_inv);
  w.tail<3>() = p.inertia * s.ang_accel + p.com_offset.cross(Vec3d(w.head<3>())) +
                s.ref.w.cross(p.inertia * s.ref.w);
  return w;
}

void write_row(std::ostream& out, double t, const StateVecd& x, const ReferencePoint& ref,
               const TraceSample& s, double solve_ms, double kkt, int iters, unsigned flags) {
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.9g", v);
    out << buf;
  };
  std::snprintf(buf, sizeof buf, "%.4f", t);
  out << buf;
  for (int i = 0; i < 13; ++i) put(x(i));
  for (int i = 0; i < 3; ++i) put(ref.p(i));
  for (int i = 0; i < 4; ++i) put(ref.q(i));
  for (int i = 0; i < 6; ++i) put(s.wrench(i));
  for (int i = 0; i < 6; ++i) put(s.estimate(i));
  for (int i = 0; i < 6; ++i) put(s.u_l1(i));
  for (int i = 0; i < 6; ++i) put(s.true_disturbance(i));
  put(solve_ms);
  put(kkt);
  out << ',' << iters << ',' << flags << '\n';
}

}  // namespace

void ExperimentSpec::validate() const {
  if (!(period > 0.0)) throw std::invalid_argument("trajectory period must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
}

std::string csv_header() {
  std::string h = "t,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,"
                  "px_ref,py_ref,pz_ref,qw_ref,qx_ref,qy_ref,qz_ref,"
                  "fx,fy,fz,tx,ty,tz";
  for (int i = 0; i < 6; ++i) h += ",est" + std::to_string(i);
  for (int i = 0; i < 6; ++i) h += ",ul1_" + std::to_string(i);
  for (int i = 0; i < 6; ++i) h += ",dtrue" + std::to_string(i);
  h += ",solve_ms,kkt,sqp_iter,flags";
  return h;
}

RunResult run_experiment(const ExperimentSpec& spec, const LabConfig& cfg_in,
                         std::ostream* csv) {
  spec.validate();
  LabConfig cfg = cfg_in;
  cfg.trajectory.period = spec.period;
  cfg.l1.sample_time = cfg.sim.control_period;
  cfg.validate();

  const VehicleParams& nominal = cfg.vehicle;
  const AllocationMatrices mats = build_matrices(cfg.geometry);
  PlantPerturbation pert = PlantPerturbation::for_group(spec.group, cfg.plant.com_shift);
  const bool mismatch = pert.allocation_mismatch || cfg.plant.allocation_mismatch;
  const VehicleParams plant = perturbed(nominal, pert);

  const double Ts = cfg.sim.control_period;
  const int substeps = cfg.sim.plant_substeps;
  const double h = Ts / substeps;
  const long steps = std::lround(spec.duration / Ts);
  const bool mpc = spec.controller != ControllerKind::kPid;

  RunResult result;
  RunMetrics& m = result.metrics;
  m.group = spec.group;
  m.controller = spec.controller;
  m.period = spec.period;
  result.trace.reserve(steps);

  const TrajectorySample s0 = sample_trajectory(0.0, cfg.trajectory);
  VehicleState init;
  init.p = s0.ref.p;
  init.q = s0.ref.q;
  init.v = s0.ref.v;
  init.w = s0.ref.w;
  StateVecd x = init.to_vector();
  Vec6d u_mpc = feedforward_wrench(s0, nominal);

  std::optional<NmpcSolver> solver;
  if (mpc) solver.emplace(nominal, mats, cfg.weights, cfg.constraints, cfg.solver);
  L1Adaptive l1(cfg.l1, nominal);
  l1.reset(x, u_mpc);
  DisturbanceEkf ekf(cfg.ekf, nominal);
  ekf.reset(x);
  CascadedPid pid(cfg.pid, nominal);
  BackupSwitch backup(cfg.backup);

  std::mt19937_64 rng(cfg.sim.seed ^ (spec.seed * 0x9E3779B97F4A7C15ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  auto noise3 = [&](double sigma) {
    Vec3d n;
    for (int i = 0; i < 3; ++i) n(i) = normal(rng);
    return Vec3d(sigma * n);
  };

  if (csv) *csv << csv_header() << '\n';

  std::vector<Vec3d> pos_err, att_err;
  pos_err.reserve(steps);
  att_err.reserve(steps);
  double solve_sum = 0.0;
  const double stage_dt = cfg.solver.stage_dt();

  for (long k = 0; k < steps; ++k) {
    const double t = k * Ts;
    const ReferenceWindow refs = reference_window(t, stage_dt, cfg.solver.stages, cfg.trajectory);
    const ReferencePoint& ref = refs.front();

    StateVecd meas = x;
    meas.segment<6>(sx::kF).setZero();
    if (cfg.sim.noise_p > 0) meas.segment<3>(sx::kP) += noise3(cfg.sim.noise_p);
    if (cfg.sim.noise_theta > 0) {
      meas.segment<4>(sx::kQ) =
          quat_box_plus(Quatd(meas.segment<4>(sx::kQ)), noise3(cfg.sim.noise_theta));
    }
    if (cfg.sim.noise_v > 0) meas.segment<3>(sx::kV) += noise3(cfg.sim.noise_v);
    if (cfg.sim.noise_w > 0) meas.segment<3>(sx::kW) += noise3(cfg.sim.noise_w);

    TraceSample sample;
    sample.t = t;
    unsigned flags = 0;
    double solve_ms = 0.0, kkt = 0.0;
    int iters = 0;
    Vec6d wrench;

    if (!mpc) {
      wrench = pid.step(meas, ref, Ts);
    } else {
      Vec6d disturbance = Vec6d::Zero();
      if (spec.controller == ControllerKind::kEkf) {
        ekf.update(EkfObservation::from_state(meas));
        disturbance = ekf.disturbance();
        sample.estimate = disturbance;
      }
      StateVecd x0 = meas;
      x0.segment<6>(sx::kF) =
          spec.controller == ControllerKind::kL1 ? l1.state().u_mpc : u_mpc;
      const OcpResult res = solver->solve(x0, refs, disturbance);
      const bool ok = res.diag.status != SolveStatus::kFailed;
      solve_ms = res.diag.solve_ms;
      kkt = res.diag.kkt;
      iters = res.diag.iterations;
      ++m.solves;
      solve_sum += solve_ms;
      m.max_solve_ms = std::max(m.max_solve_ms, solve_ms);
      if (res.diag.status == SolveStatus::kDegraded) {
        ++m.degraded_solves;
        flags |= kFlagDegraded;
      }
      if (!ok) flags |= kFlagSolveFailed;
      const Vec6d u0 = ok ? res.u0.to_vector() : Vec6d::Zero();

      bool healthy = ok;
      if (spec.controller == ControllerKind::kL1) {
        const L1Output out = l1.step(meas, u0);
        healthy = healthy && out.ok;
        wrench = out.wrench;
        sample.estimate = out.sigma_hat;
        sample.u_l1 = out.u_l1;
      } else {
        u_mpc += u0 * Ts;
        wrench = u_mpc;
      }

      if (backup.update(healthy, backup.state_valid(meas, ref))) {
        wrench = pid.step(meas, ref, Ts);
        flags |= kFlagBackup;
        ++m.backup_steps;
        // Resume the MPC from the wrench the backup is applying.
        u_mpc = wrench;
        l1.reset(meas, wrench);
        solver->reset();
      } else {
        pid.reset();
      }
    }

    sample.wrench = wrench;
    sample.backup = flags & kFlagBackup;
    Vec6d clamped = wrench;
    if (clamp_envelope(clamped, cfg.plant)) {
      ++m.wrench_saturations;
      flags |= kFlagWrenchSaturated;
    }
    Vec6d applied = clamped;
    if (cfg.plant.use_allocation) {
      bool rotor_sat = false;
      applied = actuate(clamped, mats, mismatch, rotor_sat);
      if (rotor_sat) {
        ++m.rotor_saturations;
        flags |= kFlagRotorSaturated;
      }
    }

    // Matched disturbance seen by the nominal model at this instant.
    StateVecd xa = x;
    xa.segment<6>(sx::kF) = applied;
    const StateVecd xdot = dynamics_perturbed(xa, Vec6d::Zero(), plant, pert.wrench_distortion);
    const Quatd q = x.segment<4>(sx::kQ);
    const Vec6d model_acc = ideal_dynamics(x, wrench, nominal);
    sample.true_disturbance =
        b_matrix_inverse(q, nominal) * (xdot.segment<6>(sx::kV) - model_acc);

    sample.pos_error = ref.p - x.segment<3>(sx::kP);
    sample.att_error = quat_error(q, ref.q);
    if (t >= cfg.sim.settle_time) {
      pos_err.push_back(sample.pos_error);
      att_err.push_back(sample.att_error);
    }
    if (csv) {
      write_row(*csv, t, x, ref, sample, cfg.sim.record_timing ? solve_ms : 0.0, kkt, iters,
                flags);
    }
    result.trace.push_back(sample);

    if (spec.controller == ControllerKind::kEkf) ekf.predict(wrench, Ts);

    x.segment<6>(sx::kF) = applied;
    for (int i = 0; i < substeps; ++i) {
      x = rk4_step<double>(x, Vec6d::Zero(), h, [&](const StateVecd& xx, const Vec6d& uu) {
        return dynamics_perturbed(xx, uu, plant, pert.wrench_distortion);
      });
      ++m.plant_steps;
    }
    ++m.control_steps;
    if (m.plant_steps != m.control_steps * substeps) {
      throw std::logic_error("plant/controller step count out of sync");
    }

    const double dev = (x.segment<3>(sx::kP) - reference(t + Ts, cfg.trajectory).p).norm();
    if (!x.allFinite() || dev > cfg.sim.divergence_bound) {
      m.failed = true;
      m.failure = "plant diverged at t=" + std::to_string(t + Ts);
      break;
    }
  }

  m.backup_engagements = backup.engagements();
  if (m.solves > 0) m.mean_solve_ms = solve_sum / m.solves;
  if (!pos_err.empty()) {
    m.pos_rmse = rmse(pos_err);
    m.quat_rmse = rmse(att_err);
    const double n = static_cast<double>(pos_err.size());
    for (int a = 0; a < 3; ++a) {
      double acc = 0.0;
      for (const auto& e : pos_err) acc += e(a) * e(a);
      m.pos_axis_rmse(a) = std::sqrt(acc / n);
    }
    double mean = 0.0;
    for (const auto& e : pos_err) mean += e.z();
    mean /= n;
    double var = 0.0;
    for (const auto& e : pos_err) var += (e.z() - mean) * (e.z() - mean);
    var /= std::max(1.0, n - 1.0);
    m.z_error_mean = mean;
    m.z_error_sem = std::sqrt(var / n);
  }
  return result;
}

RunResult run_experiment_to_file(const ExperimentSpec& spec, const LabConfig& cfg) {
  if (spec.output_path.empty()) return run_experiment(spec, cfg, nullptr);
  const std::filesystem::path path(spec.output_path);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(spec.output_path);
  if (!out) throw std::runtime_error("cannot write '" + spec.output_path + "'");
  RunResult r = run_experiment(spec, cfg, &out);
  if (!out) throw std::runtime_error("error writing '" + spec.output_path + "'");
  return r;
}

double reduction_percent(double adaptive, double nominal) {
  return 100.0 * (1.0 - adaptive / nominal);
}

std::vector<SummaryRow> summarize(const std::vector<RunMetrics>& runs) {
  std::map<std::pair<Group, double>, const RunMetrics*> nominal;
  for (const auto& r : runs) {
    if (r.controller == ControllerKind::kNominal && !r.failed) {
      nominal[{r.group, r.period}] = &r;
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& r : runs) {
    SummaryRow row;
    row.metrics = r;
    const auto it = nominal.find({r.group, r.period});
    if (!r.failed && it != nominal.end()) {
      row.pos_reduction = reduction_percent(r.pos_rmse, it->second->pos_rmse);
      row.quat_reduction = reduction_percent(r.quat_rmse, it->second->quat_rmse);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "group,period,controller,pos_rmse,quat_rmse,pos_reduction_pct,quat_reduction_pct,"
         "z_error_mean,z_error_sem,mean_solve_ms,max_solve_ms,wrench_saturations,"
         "rotor_saturations,backup_engagements,failed\n";
  char buf[512];
  for (const auto& row : rows) {
    const RunMetrics& m = row.metrics;
    std::snprintf(buf, sizeof buf, "%s,%g,%s,%.9g,%.9g,%.4f,%.4f,%.9g,%.9g,%.6g,%.6g,%d,%d,%d,%d\n",
                  std::string(to_string(m.group)).c_str(), m.period,
                  std::string(to_string(m.controller)).c_str(), m.pos_rmse, m.quat_rmse,
                  row.pos_reduction, row.quat_reduction, m.z_error_mean, m.z_error_sem, m.mean_solve_ms, m.max_solve_ms,
                  m.wrench_saturations, m.rotor_saturations, m.backup_engagements,
                  m.failed ? 1 : 0);
    out << buf;
  }
}

SweepResult sweep(const LabConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  std::vector<RunMetrics> runs;
  SweepResult res;
  for (Group g : cfg.sweep.groups) {
    for (double period : cfg.sweep.periods) {
      for (ControllerKind c : cfg.sweep.controllers) {
        ExperimentSpec spec;
        spec.group = g;
        spec.controller = c;
        spec.period = period;
        spec.duration = cfg.sweep.duration > 0.0 ? cfg.sweep.duration : period;
        spec.seed = cfg.sim.seed;
        char name[128];
        std::snprintf(name, sizeof name, "run_%s_%s_%g.csv", std::string(to_string(g)).c_str(),
                      std::string(to_string(c)).c_str(), period);
        spec.output_path = (std::filesystem::path(out_dir) / name).string();
        RunMetrics m;
        try {
          m = run_experiment_to_file(spec, cfg).metrics;
        } catch (const std::exception& e) {
          m.group = g;
          m.controller = c;
          m.period = period;
          m.failed = true;
          m.failure = e.what();
        }
        if (m.failed) ++res.failures;
        runs.push_back(m);
      }
    }
  }
  res.rows = summarize(runs);
  std::ofstream out(std::filesystem::path(out_dir) / "summary.csv");
  if (!out) throw std::runtime_error("cannot write summary.csv in '" + out_dir + "'");
  write_summary_csv(res.rows, out);
  return res;
}

}  // namespace l1mpc
