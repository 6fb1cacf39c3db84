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

#ifndef L1MPC_PID_HPP_
#define L1MPC_PID_HPP_

#include <Eigen/Dense>

#include "l1mpc/math.hpp"
#include "l1mpc/nmpc.hpp"
#include "l1mpc/vehicle.hpp"

namespace l1mpc {

// Cascaded gains. Position and attitude loops are proportional; the
// velocity and rate loops are PID with clamped integrators.
struct PidGains {
  Vec3d pos_p = Vec3d::Constant(1.5);    // 1/s
  Vec3d vel_p = Vec3d::Constant(4.0);    // 1/s
  Vec3d vel_i = Vec3d::Constant(1.0);    // 1/s²
  Vec3d vel_d = Vec3d::Zero();           // -
  Vec3d att_p = Vec3d::Constant(8.0);    // 1/s
  Vec3d rate_p = Vec3d::Constant(20.0);  // 1/s
  Vec3d rate_i = Vec3d::Constant(2.0);   // 1/s²
  Vec3d rate_d = Vec3d::Zero();          // -
  double vel_integrator_limit = 5.0;     // m/s² contribution
  double rate_integrator_limit = 10.0;   // rad/s² contribution
  double max_accel = 15.0;               // |v̇_sp| per axis, m/s²
  double max_ang_accel = 60.0;           // |ω̇_sp| per axis, rad/s²

  void validate() const;
};

/// Force/torque from acceleration setpoints:
///   f = m (R⁻¹(v̇_sp - g) + ω × R⁻¹v),  τ = J ω̇_sp + d × f + ω × Jω.
Vec6d pid_wrench(const StateVecd& x, const Vec3d& accel_sp, const Vec3d& ang_accel_sp,
                 const VehicleParams& params);

/// Body-rate setpoint from the attitude error, 2·sign(w)·vec(q⁻¹ ⊗ q_sp)
/// scaled per axis.
Vec3d attitude_rate_setpoint(const Quatd& q, const Quatd& q_sp, const Vec3d& gain);

struct PidSetpoints {
  Vec3d accel = Vec3d::Zero();
  Vec3d ang_accel = Vec3d::Zero();
};

class CascadedPid {
 public:
  CascadedPid(const PidGains& gains, const VehicleParams& params);

  void reset();
  /// One loop at period dt; returns the body wrench.
  Vec6d step(const StateVecd& x, const ReferencePoint& ref, double dt);
  const PidSetpoints& last_setpoints() const { return sp_; }

 private:
  PidGains gains_;
  VehicleParams params_;
  Vec3d vel_int_ = Vec3d::Zero();
  Vec3d rate_int_ = Vec3d::Zero();
  Vec3d prev_vel_err_ = Vec3d::Zero();
  Vec3d prev_rate_err_ = Vec3d::Zero();
  bool first_ = true;
  PidSetpoints sp_;
};

// Switches to the backup when the OCP hard-fails or the state leaves the
// validity envelope; hands back after `recovery_solves` consecutive good
// solves.
struct BackupPolicy {
  int recovery_solves = 10;
  double max_speed = 10.0;     // m/s
  double max_rate = 8.0;       // rad/s
  double max_tilt = 1.6;       // rad between body and reference attitude
};

class BackupSwitch {
 public:
  explicit BackupSwitch(const BackupPolicy& policy) : policy_(policy) {}

  /// Reports one control step; returns true when the backup should drive.
  bool update(bool solve_ok, bool state_valid);
  bool engaged() const { return engaged_; }
  int engagements() const { return engagements_; }

  bool state_valid(const StateVecd& x, const ReferencePoint& ref) const;

 private:
  BackupPolicy policy_;
  bool engaged_ = false;
  int good_streak_ = 0;
  int engagements_ = 0;
};

}  // namespace l1mpc

#endif  // L1MPC_PID_HPP_
