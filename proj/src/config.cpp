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

#include "l1mpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace l1mpc {

using nlohmann::json;

std::string_view to_string(ControllerKind c) {
  switch (c) {
    case ControllerKind::kNominal: return "nominal";
    case ControllerKind::kL1: return "l1";
    case ControllerKind::kEkf: return "ekf";
    case ControllerKind::kPid: return "pid";
  }
  return "?";
}

ControllerKind parse_controller(std::string_view s) {
  std::string t(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t.size() > 4 && t.ends_with("-mpc")) t.resize(t.size() - 4);
  if (t == "nominal") return ControllerKind::kNominal;
  if (t == "l1") return ControllerKind::kL1;
  if (t == "ekf") return ControllerKind::kEkf;
  if (t == "pid") return ControllerKind::kPid;
  throw std::invalid_argument("unknown controller '" + std::string(s) + "'");
}

namespace {

// One binding routine serves both directions: Reader pulls values out of a
// JSON object (keeping defaults for absent keys), Writer fills one.
class Reader {
 public:
  explicit Reader(const json& j, std::string path = "") : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw std::invalid_argument("config: '" + path_ + "' must be an object");
  }

  template <class T>
  void field(const char* key, T& value) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      read(j_.at(key), value);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config: bad value for '" + path_ + key + "': " + e.what());
    }
  }

  template <class F>
  void section(const char* key, F&& bind) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader sub(j_.at(key), path_ + key + ".");
    bind(sub);
    sub.finish();
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw std::invalid_argument("config: unknown key '" + path_ + item.key() + "'");
      }
    }
  }

 private:
  template <class T>
  static void read(const json& j, T& v) { v = j.get<T>(); }

  template <class S, int R, int C, int O, int MR, int MC>
  static void read(const json& j, Eigen::Matrix<S, R, C, O, MR, MC>& m) {
    const auto vals = j.get<std::vector<S>>();
    if (static_cast<int>(vals.size()) != m.size()) {
      throw std::invalid_argument("expected " + std::to_string(m.size()) + " numbers");
    }
    for (int i = 0; i < m.size(); ++i) m(i) = vals[i];
  }

  static void read(const json& j, WarmStart& w) {
    const auto s = j.get<std::string>();
    if (s == "none") w = WarmStart::kNone;
    else if (s == "reuse") w = WarmStart::kReuse;
    else if (s == "shift") w = WarmStart::kShift;
    else throw std::invalid_argument("warm_start must be none|reuse|shift");
  }

  static void read(const json& j, std::vector<Group>& g) {
    g.clear();
    for (const auto& s : j.get<std::vector<std::string>>()) g.push_back(parse_group(s));
  }

  static void read(const json& j, std::vector<ControllerKind>& c) {
    c.clear();
    for (const auto& s : j.get<std::vector<std::string>>()) c.push_back(parse_controller(s));
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) { j_ = json::object(); }

  template <class T>
  void field(const char* key, T& value) { j_[key] = write(value); }

  template <class F>
  void section(const char* key, F&& bind) {
    json sub;
    Writer w(sub);
    bind(w);
    j_[key] = sub;
  }

 private:
  template <class T>
  static json write(const T& v) { return v; }

  template <class S, int R, int C, int O, int MR, int MC>
  static json write(const Eigen::Matrix<S, R, C, O, MR, MC>& m) {
    return std::vector<S>(m.data(), m.data() + m.size());
  }

  static json write(const WarmStart& w) {
    switch (w) {
      case WarmStart::kNone: return "none";
      case WarmStart::kShift: return "shift";
      default: return "reuse";
    }
  }

  static json write(const std::vector<Group>& g) {
    json a = json::array();
    for (Group x : g) a.push_back(std::string(to_string(x)));
    return a;
  }

  static json write(const std::vector<ControllerKind>& c) {
    json a = json::array();
    for (ControllerKind x : c) a.push_back(std::string(to_string(x)));
    return a;
  }

  json& j_;
};

template <class A>
void bind(A& a, LabConfig& c) {
  a.section("vehicle", [&](A& s) {
    s.field("mass", c.vehicle.mass);
    s.field("inertia", c.vehicle.inertia);
    s.field("com_offset", c.vehicle.com_offset);
    s.field("gravity", c.vehicle.gravity);
    s.field("arm_length", c.vehicle.arm_length);
  });
  a.section("geometry", [&](A& s) {
    s.field("azimuth", c.geometry.azimuth);
    s.field("spin", c.geometry.spin);
    s.field("arm_length", c.geometry.arm_length);
    s.field("thrust_coeff", c.geometry.thrust_coeff);
    s.field("drag_coeff", c.geometry.drag_coeff);
    s.field("omega_min", c.geometry.omega_min);
    s.field("omega_max", c.geometry.omega_max);
  });
  a.section("weights", [&](A& s) {
    s.field("stage", c.weights.stage);
    s.field("control", c.weights.control);
    s.field("terminal", c.weights.terminal);
  });
  a.section("constraints", [&](A& s) {
    s.field("v_lb", c.constraints.v_lb);
    s.field("v_ub", c.constraints.v_ub);
    s.field("w_lb", c.constraints.w_lb);
    s.field("w_ub", c.constraints.w_ub);
    s.field("thrust_sq_lb", c.constraints.thrust_sq_lb);
    s.field("thrust_sq_ub", c.constraints.thrust_sq_ub);
    s.field("u_lb", c.constraints.u_lb);
    s.field("u_ub", c.constraints.u_ub);
  });
  a.section("solver", [&](A& s) {
    s.field("horizon", c.solver.horizon);
    s.field("stages", c.solver.stages);
    s.field("max_iterations", c.solver.max_iterations);
    s.field("kkt_tolerance", c.solver.kkt_tolerance);
    s.field("penalty_weight", c.solver.penalty_weight);
    s.field("warm_start", c.solver.warm_start);
  });
  a.section("l1", [&](A& s) {
    s.field("adaptive_gain", c.l1.adaptive_gain);
    s.field("cutoff", c.l1.cutoff);
    s.field("attitude_lookahead", c.l1.attitude_lookahead);
  });
  a.section("ekf", [&](A& s) {
    s.field("sigma_p", c.ekf.sigma_p);
    s.field("sigma_theta", c.ekf.sigma_theta);
    s.field("sigma_v", c.ekf.sigma_v);
    s.field("sigma_w", c.ekf.sigma_w);
    s.field("sigma_force", c.ekf.sigma_force);
    s.field("sigma_torque", c.ekf.sigma_torque);
    s.field("obs_p", c.ekf.obs_p);
    s.field("obs_theta", c.ekf.obs_theta);
    s.field("obs_v", c.ekf.obs_v);
    s.field("obs_w", c.ekf.obs_w);
    s.field("initial_force_sigma", c.ekf.initial_force_sigma);
    s.field("initial_torque_sigma", c.ekf.initial_torque_sigma);
  });
  a.section("pid", [&](A& s) {
    s.field("pos_p", c.pid.pos_p);
    s.field("vel_p", c.pid.vel_p);
    s.field("vel_i", c.pid.vel_i);
    s.field("vel_d", c.pid.vel_d);
    s.field("att_p", c.pid.att_p);
    s.field("rate_p", c.pid.rate_p);
    s.field("rate_i", c.pid.rate_i);
    s.field("rate_d", c.pid.rate_d);
    s.field("vel_integrator_limit", c.pid.vel_integrator_limit);
    s.field("rate_integrator_limit", c.pid.rate_integrator_limit);
    s.field("max_accel", c.pid.max_accel);
    s.field("max_ang_accel", c.pid.max_ang_accel);
  });
  a.section("backup", [&](A& s) {
    s.field("recovery_solves", c.backup.recovery_solves);
    s.field("max_speed", c.backup.max_speed);
    s.field("max_rate", c.backup.max_rate);
    s.field("max_tilt", c.backup.max_tilt);
  });
  a.section("trajectory", [&](A& s) {
    s.field("period", c.trajectory.period);
    s.field("position_amplitude", c.trajectory.position_amplitude);
    s.field("z0", c.trajectory.z0);
    s.field("attitude_amplitude", c.trajectory.attitude_amplitude);
    s.field("position_phase", c.trajectory.position_phase);
    s.field("attitude_phase", c.trajectory.attitude_phase);
  });
  a.section("plant", [&](A& s) {
    s.field("com_shift", c.plant.com_shift);
    s.field("use_allocation", c.plant.use_allocation);
    s.field("allocation_mismatch", c.plant.allocation_mismatch);
    s.field("force_limit", c.plant.force_limit);
    s.field("torque_limit", c.plant.torque_limit);
  });
  a.section("sim", [&](A& s) {
    s.field("control_period", c.sim.control_period);
    s.field("plant_substeps", c.sim.plant_substeps);
    s.field("divergence_bound", c.sim.divergence_bound);
    s.field("settle_time", c.sim.settle_time);
    s.field("seed", c.sim.seed);
    s.field("noise_p", c.sim.noise_p);
    s.field("noise_theta", c.sim.noise_theta);
    s.field("noise_v", c.sim.noise_v);
    s.field("noise_w", c.sim.noise_w);
    s.field("record_timing", c.sim.record_timing);
  });
  a.section("sweep", [&](A& s) {
    s.field("groups", c.sweep.groups);
    s.field("controllers", c.sweep.controllers);
    s.field("periods", c.sweep.periods);
    s.field("duration", c.sweep.duration);
  });
}

}  // namespace

void LabConfig::validate() const {
  vehicle.validate();
  build_matrices(geometry);
  weights.validate();
  constraints.validate();
  solver.validate();
  l1.validate();
  ekf.validate();
  pid.validate();
  trajectory.validate();
  if (!(plant.force_limit > 0.0) || !(plant.torque_limit > 0.0)) {
    throw std::invalid_argument("wrench envelope limits must be positive");
  }
  if (!(sim.control_period > 0.0) || sim.plant_substeps < 1) {
    throw std::invalid_argument("control period must be > 0 with >= 1 plant substep");
  }
  if (std::abs(l1.sample_time - sim.control_period) > 1e-12) {
    throw std::invalid_argument("L1 sample time must equal the control period");
  }
  if (!(sim.divergence_bound > 0.0) || !(sim.settle_time >= 0.0)) {
    throw std::invalid_argument("divergence bound must be > 0 and settle time >= 0");
  }
  if (sim.noise_p < 0 || sim.noise_theta < 0 || sim.noise_v < 0 || sim.noise_w < 0) {
    throw std::invalid_argument("sensor noise must be >= 0");
  }
  if (backup.recovery_solves < 1) throw std::invalid_argument("recovery_solves must be >= 1");
  for (double p : sweep.periods) {
    if (!(p > 0.0)) throw std::invalid_argument("sweep periods must be positive");
  }
  if (!(sweep.duration >= 0.0)) throw std::invalid_argument("sweep duration must be >= 0");
}

LabConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  LabConfig cfg;
  Reader r(j);
  bind(r, cfg);
  r.finish();
  cfg.l1.sample_time = cfg.sim.control_period;
  cfg.ekf.update_period = cfg.sim.control_period;
  cfg.validate();
  return cfg;
}

LabConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const LabConfig& cfg) {
  LabConfig copy = cfg;
  json j;
  Writer w(j);
  bind(w, copy);
  return j.dump(2);
}

}  // namespace l1mpc
