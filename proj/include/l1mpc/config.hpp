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

#ifndef L1MPC_CONFIG_HPP_
#define L1MPC_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "l1mpc/allocation.hpp"
#include "l1mpc/ekf.hpp"
#include "l1mpc/l1_adaptive.hpp"
#include "l1mpc/nmpc.hpp"
#include "l1mpc/pid.hpp"
#include "l1mpc/trajectory.hpp"
#include "l1mpc/vehicle.hpp"

namespace l1mpc {

enum class ControllerKind { kNominal, kL1, kEkf, kPid };

std::string_view to_string(ControllerKind c);
/// Accepts nominal|l1|ekf|pid (and nominal-mpc, l1-mpc, ekf-mpc).
ControllerKind parse_controller(std::string_view s);

struct PlantConfig {
  Vec3d com_shift = Vec3d::Constant(0.01);  // m, applied for groups B-D
  bool use_allocation = true;       // route the wrench through the rotors
  bool allocation_mismatch = false;  // square root instead of fourth root
  double force_limit = 150.0;       // N, norm
  double torque_limit = 20.0;       // N·m, norm
};

struct SimConfig {
  double control_period = 0.01;  // s
  int plant_substeps = 10;
  double divergence_bound = 50.0;  // m from the reference
  double settle_time = 0.0;        // s excluded from the RMSE
  std::uint64_t seed = 0;
  // Standard deviations of white measurement noise.
  double noise_p = 0.0, noise_theta = 0.0, noise_v = 0.0, noise_w = 0.0;
  bool record_timing = true;  // solve_ms column; off for byte-identical CSVs
};

struct SweepConfig {
  std::vector<Group> groups{Group::kA, Group::kB, Group::kC, Group::kD};
  std::vector<ControllerKind> controllers{ControllerKind::kNominal, ControllerKind::kL1,
                                          ControllerKind::kEkf, ControllerKind::kPid};
  std::vector<double> periods{15.0, 20.0, 30.0};
  double duration = 0.0;  // s; 0 runs one trajectory period
};

struct LabConfig {
  VehicleParams vehicle;
  ActuatorGeometry geometry = ActuatorGeometry::hexacopter();
  OcpWeights weights = OcpWeights::defaults();
  ConstraintSet constraints;
  SolverConfig solver;
  L1Config l1;
  EkfConfig ekf;
  PidGains pid;
  BackupPolicy backup;
  TrajectorySpec trajectory;
  PlantConfig plant;
  SimConfig sim;
  SweepConfig sweep;

  /// Throws std::invalid_argument on any invalid section.
  void validate() const;
};

/// Parses JSON text; absent keys keep their defaults, unknown keys are errors.
LabConfig parse_config(const std::string& text);
LabConfig load_config(const std::string& path);
/// Full configuration as JSON, every key present.
std::string dump_config(const LabConfig& cfg);

}  // namespace l1mpc

#endif  // L1MPC_CONFIG_HPP_
