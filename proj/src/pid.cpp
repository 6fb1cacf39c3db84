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

#include "l1mpc/pid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace l1mpc {

void PidGains::validate() const {
  const bool ok = (pos_p.array() >= 0).all() && (vel_p.array() >= 0).all() &&
                  (vel_i.array() >= 0).all() && (vel_d.array() >= 0).all() &&
                  (att_p.array() >= 0).all() && (rate_p.array() >= 0).all() &&
                  (rate_i.array() >= 0).all() && (rate_d.array() >= 0).all() &&
                  vel_integrator_limit >= 0 && rate_integrator_limit >= 0 &&
                  max_accel > 0 && max_ang_accel > 0;
  if (!ok) throw std::invalid_argument("PID gains and limits must be non-negative");
}

Vec6d pid_wrench(const StateVecd& x, const Vec3d& accel_sp, const Vec3d& ang_accel_sp,
                 const VehicleParams& params) {
  const Quatd q = x.segment<4>(sx::kQ);
  const Quatd q_inv = quat_inverse(q);
  const Vec3d v = x.segment<3>(sx::kV);
  const Vec3d w = x.segment<3>(sx::kW);
  Vec6d out;
  const Vec3d f =
      params.mass * (rotate(Vec3d(accel_sp - params.gravity), q_inv) + w.cross(rotate(v, q_inv)));
  out.head<3>() = f;
  out.tail<3>() = params.inertia * ang_accel_sp + params.com_offset.cross(f) +
                  w.cross(params.inertia * w);
  return out;
}

Vec3d attitude_rate_setpoint(const Quatd& q, const Quatd& q_sp, const Vec3d& gain) {
  const Quatd e = quat_mul(quat_inverse(q), q_sp);
  const double sign = e(0) < 0.0 ? -1.0 : 1.0;
  return gain.cwiseProduct(2.0 * sign * e.tail<3>());
}

CascadedPid::CascadedPid(const PidGains& gains, const VehicleParams& params)
    : gains_(gains), params_(params) {
  gains.validate();
  params.validate();
}

void CascadedPid::reset() {
  vel_int_.setZero();
  rate_int_.setZero();
  prev_vel_err_.setZero();
  prev_rate_err_.setZero();
  first_ = true;
}

Vec6d CascadedPid::step(const StateVecd& x, const ReferencePoint& ref, double dt) {
  const Vec3d p = x.segment<3>(sx::kP);
  const Vec3d v = x.segment<3>(sx::kV);
  const Vec3d w = x.segment<3>(sx::kW);
  const Quatd q = x.segment<4>(sx::kQ);

  const Vec3d v_sp = ref.v + gains_.pos_p.cwiseProduct(ref.p - p);
  const Vec3d v_err = v_sp - v;
  vel_int_ = (vel_int_ + gains_.vel_i.cwiseProduct(v_err) * dt)
                 .cwiseMax(-gains_.vel_integrator_limit)
                 .cwiseMin(gains_.vel_integrator_limit);
  const Vec3d v_derr = first_ ? Vec3d::Zero() : Vec3d((v_err - prev_vel_err_) / dt);
  sp_.accel = (gains_.vel_p.cwiseProduct(v_err) + vel_int_ + gains_.vel_d.cwiseProduct(v_derr))
                  .cwiseMax(-gains_.max_accel)
                  .cwiseMin(gains_.max_accel);

  // Reference rate is expressed in the reference body frame.
  const Quatd q_rel = quat_mul(quat_inverse(q), ref.q);
  const Vec3d w_sp = rotate(ref.w, q_rel) + attitude_rate_setpoint(q, ref.q, gains_.att_p);
  const Vec3d w_err = w_sp - w;
  rate_int_ = (rate_int_ + gains_.rate_i.cwiseProduct(w_err) * dt)
                  .cwiseMax(-gains_.rate_integrator_limit)
                  .cwiseMin(gains_.rate_integrator_limit);
  const Vec3d w_derr = first_ ? Vec3d::Zero() : Vec3d((w_err - prev_rate_err_) / dt);
  sp_.ang_accel =
      (gains_.rate_p.cwiseProduct(w_err) + rate_int_ + gains_.rate_d.cwiseProduct(w_derr))
          .cwiseMax(-gains_.max_ang_accel)
          .cwiseMin(gains_.max_ang_accel);

  prev_vel_err_ = v_err;
  prev_rate_err_ = w_err;
  first_ = false;
  return pid_wrench(x, sp_.accel, sp_.ang_accel, params_);
}

bool BackupSwitch::state_valid(const StateVecd& x, const ReferencePoint& ref) const {
  if (!x.allFinite()) return false;
  if (x.segment<3>(sx::kV).norm() > policy_.max_speed) return false;
  if (x.segment<3>(sx::kW).norm() > policy_.max_rate) return false;
  const Vec3d e = quat_error(Quatd(x.segment<4>(sx::kQ)), ref.q);
  const double angle = 2.0 * std::asin(std::min(1.0, e.norm()));
  return angle <= policy_.max_tilt;
}

bool BackupSwitch::update(bool solve_ok, bool state_valid) {
  if (!solve_ok || !state_valid) {
    if (!engaged_) ++engagements_;
    engaged_ = true;
    good_streak_ = 0;
    return engaged_;
  }
  if (engaged_ && ++good_streak_ >= policy_.recovery_solves) {
    engaged_ = false;
    good_streak_ = 0;
  }
  return engaged_;
}

}  // namespace l1mpc
