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

#ifndef L1MPC_EKF_HPP_
#define L1MPC_EKF_HPP_

#include <Eigen/Dense>

#include "l1mpc/math.hpp"
#include "l1mpc/vehicle.hpp"

// Disturbance-wrench EKF. The filter state reuses the 19-vector layout of
// the vehicle state with the wrench slots holding the estimated disturbance
// (f_EKF, τ_EKF) in body axes. Covariance lives on the 18-dim tangent.
namespace l1mpc {

using Mat18d = Eigen::Matrix<double, 18, 18>;
using Vec13d = Eigen::Matrix<double, 13, 1>;

struct EkfState {
  StateVecd x = VehicleState{}.to_vector();
  Mat18d P = Mat18d::Identity() * 1e-2;

  Vec3d force() const { return x.segment<3>(sx::kF); }
  Vec3d torque() const { return x.segment<3>(sx::kT); }
};

struct EkfConfig {
  // Process noise densities (per √s) of [p, θ, v, ω, f_EKF, τ_EKF].
  Vec3d sigma_p = Vec3d::Constant(1e-3);
  Vec3d sigma_theta = Vec3d::Constant(1e-3);
  Vec3d sigma_v = Vec3d::Constant(1e-2);
  Vec3d sigma_w = Vec3d::Constant(1e-2);
  Vec3d sigma_force = Vec3d::Constant(5.0);    // N/√s
  Vec3d sigma_torque = Vec3d::Constant(0.5);   // N·m/√s
  // Observation noise standard deviations.
  Vec3d obs_p = Vec3d::Constant(0.01);                    // m
  Vec3d obs_theta = Vec3d::Constant(0.5 * M_PI / 180.0);  // rad
  Vec3d obs_v = Vec3d::Constant(0.02);                    // m/s
  Vec3d obs_w = Vec3d::Constant(0.01);                    // rad/s
  double update_period = 0.01;                            // s
  // Initial standard deviation of the disturbance states.
  double initial_force_sigma = 5.0;
  double initial_torque_sigma = 0.5;

  Mat18d process_noise() const;       // spectral density, multiplied by dt
  Eigen::Matrix<double, 12, 12> observation_noise() const;
  void validate() const;
};

/// Filter model: the nominal dynamics driven by the commanded wrench plus the
/// estimated disturbance, with ḟ_EKF = -ω × f_EKF and τ̇_EKF = 0.
template <class DX>
StateVec<typename DX::Scalar> ekf_dynamics(const Eigen::MatrixBase<DX>& x, const Vec6d& wrench,
                                           const VehicleParams& params) {
  using S = typename DX::Scalar;
  StateVec<S> xs = x;
  const Vec3<S> w = xs.template segment<3>(sx::kW);
  const Vec3<S> fe = xs.template segment<3>(sx::kF);
  StateVec<S> ws = xs;
  ws.template segment<3>(sx::kF) = fe + wrench.head<3>().template cast<S>();
  ws.template segment<3>(sx::kT) =
      xs.template segment<3>(sx::kT) + wrench.tail<3>().template cast<S>();
  StateVec<S> dx = dynamics_nominal(ws, Vec6<S>::Zero(), params);
  dx.template segment<3>(sx::kF) = -w.cross(fe);
  dx.template segment<3>(sx::kT).setZero();
  return dx;
}

/// RK4 mean propagation over dt with the error-state Jacobian for P.
EkfState ekf_predict(const EkfState& s, const Vec6d& wrench, const EkfConfig& cfg,
                     const VehicleParams& params, double dt);

/// Observation of [p, q, v, ω]; the attitude innovation is q_obs ⊟ q.
struct EkfObservation {
  Vec3d p = Vec3d::Zero();
  Quatd q = quat_identity();
  Vec3d v = Vec3d::Zero();
  Vec3d w = Vec3d::Zero();

  static EkfObservation from_state(const StateVecd& x);
};

struct EkfUpdateResult {
  EkfState state;
  bool applied = true;  // false when the innovation was not finite
};

EkfUpdateResult ekf_update(const EkfState& s, const EkfObservation& z, const EkfConfig& cfg);

class DisturbanceEkf {
 public:
  DisturbanceEkf(const EkfConfig& cfg, const VehicleParams& params);

  /// Kinematic states from x, zero disturbance, default initial covariance.
  void reset(const StateVecd& x);
  /// Measurement update followed by nothing else; returns false when skipped.
  bool update(const EkfObservation& z);
  void predict(const Vec6d& wrench, double dt);

  const EkfState& state() const { return state_; }
  Vec6d disturbance() const;

 private:
  EkfConfig cfg_;
  VehicleParams params_;
  EkfState state_;
};

}  // namespace l1mpc

#endif  // L1MPC_EKF_HPP_
