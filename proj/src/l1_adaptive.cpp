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

#include "l1mpc/l1_adaptive.hpp"

#include <cmath>
#include <stdexcept>

namespace l1mpc {

void L1Config::validate() const {
  if ((adaptive_gain.array() >= 0.0).any() || !adaptive_gain.allFinite()) {
    throw std::invalid_argument("L1 adaptive gain must be Hurwitz (all entries < 0)");
  }
  if (!(sample_time > 0.0)) throw std::invalid_argument("L1 sample time must be positive");
  if ((cutoff.array() < 0.0).any() || !cutoff.allFinite()) {
    throw std::invalid_argument("L1 cut-off frequencies must be >= 0");
  }
}

Mat6d b_matrix(const Quatd& q, const VehicleParams& params) {
  const Mat3d R = rotation_matrix(q);
  const Mat3d J_inv = params.inertia.inverse();
  Mat6d B = Mat6d::Zero();
  B.topLeftCorner<3, 3>() = R / params.mass;
  B.bottomLeftCorner<3, 3>() = -J_inv * skew(params.com_offset);
  B.bottomRightCorner<3, 3>() = J_inv;
  return B;
}

Mat6d b_matrix_inverse(const Quatd& q, const VehicleParams& params) {
  const Mat3d Rt = rotation_matrix(q).transpose();
  Mat6d B = Mat6d::Zero();
  B.topLeftCorner<3, 3>() = params.mass * Rt;
  B.bottomLeftCorner<3, 3>() = params.mass * skew(params.com_offset) * Rt;
  B.bottomRightCorner<3, 3>() = params.inertia;
  return B;
}

Vec6d ideal_dynamics(const StateVecd& x, const Vec6d& wrench, const VehicleParams& params) {
  return rigid_body_acceleration(x.segment<4>(sx::kQ), x.segment<3>(sx::kW), wrench.head<3>(),
                                 wrench.tail<3>(), params);
}

Vec6d adaptation_gain(const L1Config& cfg) {
  cfg.validate();
  const Eigen::Array<double, 6, 1> e = (cfg.adaptive_gain * cfg.sample_time).array().exp();
  return (cfg.adaptive_gain.array() * e / (e - 1.0)).matrix();
}

Vec6d adapt(const Vec6d& z_tilde, const Mat6d& b_inv, const Vec6d& gain) {
  return -b_inv * gain.cwiseProduct(z_tilde);
}

Vec6d lpf_coefficient(const L1Config& cfg) {
  return (1.0 - (-cfg.cutoff.array() * cfg.sample_time).exp()).matrix();
}

Vec6d lpf_step(const Vec6d& sigma_hat, Vec6d& filter, const Vec6d& beta) {
  filter += beta.cwiseProduct(sigma_hat - filter);
  return -filter;
}

L1Adaptive::L1Adaptive(const L1Config& cfg, const VehicleParams& params)
    : cfg_(cfg), params_(params) {
  cfg.validate();
  params.validate();
  gain_ = adaptation_gain(cfg);
  beta_ = lpf_coefficient(cfg);
}

void L1Adaptive::reset(const StateVecd& x, const Vec6d& initial_wrench) {
  state_ = L1State{};
  state_.z_hat << x.segment<3>(sx::kV), x.segment<3>(sx::kW);
  state_.u_mpc = initial_wrench;
}

L1Output L1Adaptive::step(const StateVecd& x, const Vec6d& u_ocp) {
  L1Output out;
  if (!x.allFinite() || !u_ocp.allFinite()) {
    out.ok = false;
    return out;
  }
  const double T = cfg_.sample_time;
  L1State next = state_;
  next.u_mpc += u_ocp * T;

  StateVecd xa = x;
  if (cfg_.attitude_lookahead) {
    xa.segment<4>(sx::kQ) =
        quat_box_plus(x.segment<4>(sx::kQ), Vec3d(x.segment<3>(sx::kW) * (T / 2)));
  }
  const Quatd q = xa.segment<4>(sx::kQ);
  const Vec6d a_ideal = ideal_dynamics(xa, next.u_mpc, params_);
  const Mat6d B = b_matrix(q, params_);
  Vec6d z;
  z << x.segment<3>(sx::kV), x.segment<3>(sx::kW);
  const Vec6d z_tilde = next.z_hat - z;

  next.sigma_hat = adapt(z_tilde, b_matrix_inverse(q, params_), gain_);
  Vec6d u_l1 = lpf_step(next.sigma_hat, next.filter, beta_);
  if (!output_enabled_) u_l1.setZero();

  const Vec6d z_hat_dot =
      a_ideal + B * (u_l1 + next.sigma_hat) + cfg_.adaptive_gain.cwiseProduct(z_tilde);
  next.z_hat += T * z_hat_dot;

  if (!next.z_hat.allFinite() || !next.sigma_hat.allFinite()) {
    out.ok = false;
    return out;
  }
  state_ = next;
  out.u_l1 = u_l1;
  out.sigma_hat = next.sigma_hat;
  out.wrench = next.u_mpc + u_l1;
  return out;
}

}  // namespace l1mpc
