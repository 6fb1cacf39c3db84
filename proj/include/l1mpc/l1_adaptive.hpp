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

#ifndef L1MPC_L1_ADAPTIVE_HPP_
#define L1MPC_L1_ADAPTIVE_HPP_

#include <Eigen/Dense>

#include "l1mpc/math.hpp"
#include "l1mpc/vehicle.hpp"

// L1 augmentation of a wrench-level controller. The matched uncertainty σ is
// a body wrench; the predictor runs on z = [v (world); ω (body)].
namespace l1mpc {

struct L1Config {
  // diag(A), 1/s, all < 0. A constant σ is estimated as e^{AT}·σ, so |A|·T
  // sets the steady-state compensation bias.
  Vec6d adaptive_gain = Vec6d::Constant(-1.0);
  double sample_time = 0.01;                     // s
  Vec6d cutoff = (Vec6d() << 40, 40, 40, 60, 60, 60).finished();  // rad/s
  // Evaluate 𝒜 and ℬ at the attitude half a sample ahead (q ⊞ ωT/2). The
  // Euler predictor otherwise sees the rotation of the thrust over the
  // sample as a spurious uncertainty of about ½T·|ω×f|.
  bool attitude_lookahead = true;

  void validate() const;
};

struct L1State {
  Vec6d z_hat = Vec6d::Zero();
  Vec6d sigma_hat = Vec6d::Zero();
  Vec6d filter = Vec6d::Zero();  // LPF state y; u_L1 = -y
  Vec6d u_mpc = Vec6d::Zero();
};

/// Input matrix [[R/m, 0], [-J⁻¹[d]×, J⁻¹]] mapping a body wrench to ż.
Mat6d b_matrix(const Quatd& q, const VehicleParams& params);

/// Closed-form inverse [[m Rᵀ, 0], [m [d]× Rᵀ, J]].
Mat6d b_matrix_inverse(const Quatd& q, const VehicleParams& params);

/// ż of the nominal model under wrench u: [g + R f/m; J⁻¹(τ - d×f - ω×Jω)].
Vec6d ideal_dynamics(const StateVecd& x, const Vec6d& wrench, const VehicleParams& params);

/// Diagonal of (e^{AT}-I)⁻¹ A e^{AT}.
Vec6d adaptation_gain(const L1Config& cfg);

/// Piecewise-constant adaptive law σ̂ = -ℬ⁻¹ (e^{AT}-I)⁻¹ A e^{AT} z̃.
Vec6d adapt(const Vec6d& z_tilde, const Mat6d& b_inv, const Vec6d& gain);

/// Per-axis 1 - e^{-ω_c T}.
Vec6d lpf_coefficient(const L1Config& cfg);

/// One step of y ← y + β(σ̂ - y); returns u_L1 = -y.
Vec6d lpf_step(const Vec6d& sigma_hat, Vec6d& filter, const Vec6d& beta);

struct L1Output {
  Vec6d wrench = Vec6d::Zero();  // u_mpc + u_L1
  Vec6d u_l1 = Vec6d::Zero();
  Vec6d sigma_hat = Vec6d::Zero();
  bool ok = true;
};

class L1Adaptive {
 public:
  L1Adaptive(const L1Config& cfg, const VehicleParams& params);

  /// ẑ₀ ← z₀ and u_mpc ← initial_wrench (zero in the plain algorithm).
  void reset(const StateVecd& x, const Vec6d& initial_wrench = Vec6d::Zero());

  /// One control period with the measured state and the OCP wrench rate.
  /// Returns ok = false, leaving the state untouched, on non-finite input.
  L1Output step(const StateVecd& x, const Vec6d& u_ocp);

  /// Disables the output (u_L1 ≡ 0) while keeping the estimator running.
  void set_output_enabled(bool on) { output_enabled_ = on; }

  const L1State& state() const { return state_; }
  const L1Config& config() const { return cfg_; }
  const Vec6d& gain() const { return gain_; }
  const Vec6d& beta() const { return beta_; }

 private:
  L1Config cfg_;
  VehicleParams params_;
  Vec6d gain_;
  Vec6d beta_;
  L1State state_;
  bool output_enabled_ = true;
};

}  // namespace l1mpc

#endif  // L1MPC_L1_ADAPTIVE_HPP_
