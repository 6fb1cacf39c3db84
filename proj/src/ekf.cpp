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

#include "l1mpc/ekf.hpp"

#include <stdexcept>

#include <unsupported/Eigen/AutoDiff>

namespace l1mpc {

namespace {

using Jet18 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 18, 1>>;

template <class V>
bool nonnegative(const V& v) {
  return v.allFinite() && (v.array() >= 0.0).all();
}

}  // namespace

Mat18d EkfConfig::process_noise() const {
  Eigen::Matrix<double, 18, 1> s;
  s << sigma_p, sigma_theta, sigma_v, sigma_w, sigma_force, sigma_torque;
  return s.cwiseAbs2().asDiagonal();
}

Eigen::Matrix<double, 12, 12> EkfConfig::observation_noise() const {
  Eigen::Matrix<double, 12, 1> s;
  s << obs_p, obs_theta, obs_v, obs_w;
  return s.cwiseAbs2().asDiagonal();
}

void EkfConfig::validate() const {
  if (!nonnegative(sigma_p) || !nonnegative(sigma_theta) || !nonnegative(sigma_v) ||
      !nonnegative(sigma_w) || !nonnegative(sigma_force) || !nonnegative(sigma_torque)) {
    throw std::invalid_argument("EKF process noise must be >= 0");
  }
  Eigen::Matrix<double, 12, 1> r;
  r << obs_p, obs_theta, obs_v, obs_w;
  if (!r.allFinite() || (r.array() <= 0.0).any()) {
    throw std::invalid_argument("EKF observation noise must be > 0");
  }
  if (!(update_period > 0.0)) throw std::invalid_argument("EKF update period must be > 0");
  if (!(initial_force_sigma >= 0.0) || !(initial_torque_sigma >= 0.0)) {
    throw std::invalid_argument("EKF initial sigma must be >= 0");
  }
}

EkfState ekf_predict(const EkfState& s, const Vec6d& wrench, const EkfConfig& cfg,
                     const VehicleParams& params, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("EKF prediction step must be positive");
  auto f = [&](const auto& x, const auto&) { return ekf_dynamics(x, wrench, params); };

  // F = ∂(rk4(x ⊞ δ) ⊟ rk4(x)) / ∂δ at δ = 0.
  TangentVec<Jet18> delta;
  for (int i = 0; i < 18; ++i) delta(i) = Jet18(0.0, 18, i);
  const StateVec<Jet18> xj = state_box_plus(s.x.cast<Jet18>(), delta);
  const StateVec<Jet18> next_j = rk4_step<Jet18>(xj, Vec6<Jet18>::Zero(), dt, f);

  EkfState out;
  out.x = rk4_step<double>(s.x, Vec6d::Zero(), dt, f);
  const TangentVec<Jet18> diff = state_box_minus(next_j, out.x);
  Mat18d F;
  for (int i = 0; i < 18; ++i) F.row(i) = diff(i).derivatives().transpose();

  out.P = F * s.P * F.transpose() + cfg.process_noise() * dt;
  out.P = 0.5 * (out.P + out.P.transpose()).eval();
  return out;
}

EkfObservation EkfObservation::from_state(const StateVecd& x) {
  EkfObservation z;
  z.p = x.segment<3>(sx::kP);
  z.q = x.segment<4>(sx::kQ);
  z.v = x.segment<3>(sx::kV);
  z.w = x.segment<3>(sx::kW);
  return z;
}

EkfUpdateResult ekf_update(const EkfState& s, const EkfObservation& z, const EkfConfig& cfg) {
  EkfUpdateResult res;
  res.state = s;
  Eigen::Matrix<double, 12, 1> y;
  y << z.p - s.x.segment<3>(sx::kP), quat_box_minus(z.q, Quatd(s.x.segment<4>(sx::kQ))),
      z.v - s.x.segment<3>(sx::kV), z.w - s.x.segment<3>(sx::kW);
  if (!y.allFinite()) {
    res.applied = false;
    return res;
  }
  // H = [I₁₂ 0]: every product with H is a block selection.
  const Eigen::Matrix<double, 12, 12> S =
      s.P.topLeftCorner<12, 12>() + cfg.observation_noise();
  const Eigen::Matrix<double, 18, 12> K =
      S.llt().solve(s.P.leftCols<12>().transpose()).transpose();
  const TangentVecd dx = K * y;
  if (!dx.allFinite()) {
    res.applied = false;
    return res;
  }
  res.state.x = state_box_plus(s.x, dx);

  Mat18d I_KH = Mat18d::Identity();
  I_KH.leftCols<12>() -= K;
  Mat18d P = I_KH * s.P * I_KH.transpose() + K * cfg.observation_noise() * K.transpose();
  res.state.P = 0.5 * (P + P.transpose());
  return res;
}

DisturbanceEkf::DisturbanceEkf(const EkfConfig& cfg, const VehicleParams& params)
    : cfg_(cfg), params_(params) {
  cfg.validate();
  params.validate();
}

void DisturbanceEkf::reset(const StateVecd& x) {
  state_.x = x;
  state_.x.segment<6>(sx::kF).setZero();
  Eigen::Matrix<double, 18, 1> d;
  d << cfg_.obs_p, cfg_.obs_theta, cfg_.obs_v, cfg_.obs_w,
      Vec3d::Constant(cfg_.initial_force_sigma), Vec3d::Constant(cfg_.initial_torque_sigma);
  state_.P = d.cwiseAbs2().asDiagonal();
}

bool DisturbanceEkf::update(const EkfObservation& z) {
  EkfUpdateResult r = ekf_update(state_, z, cfg_);
  state_ = r.state;
  return r.applied;
}

void DisturbanceEkf::predict(const Vec6d& wrench, double dt) {
  state_ = ekf_predict(state_, wrench, cfg_, params_, dt);
}

Vec6d DisturbanceEkf::disturbance() const {
  return state_.x.segment<6>(sx::kF);
}

}  // namespace l1mpc
