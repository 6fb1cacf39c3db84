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

#ifndef L1MPC_NMPC_HPP_
#define L1MPC_NMPC_HPP_

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "l1mpc/allocation.hpp"
#include "l1mpc/math.hpp"
#include "l1mpc/sqp.hpp"
#include "l1mpc/vehicle.hpp"

namespace l1mpc {

using Vec18d = Eigen::Matrix<double, 18, 1>;

/// One sample of the tracked trajectory.
struct ReferencePoint {
  Vec3d p = Vec3d::Zero();
  Quatd q = quat_identity();
  Vec3d v = Vec3d::Zero();
  Vec3d w = Vec3d::Zero();
};

/// N+1 samples at the shooting nodes.
using ReferenceWindow = std::vector<ReferencePoint>;

/// Diagonal weights. Blocks of the 18-vector: position, attitude, velocity,
/// angular velocity, actuator force, actuator torque.
struct OcpWeights {
  Vec18d stage;
  Vec6d control;
  Vec18d terminal;

  static OcpWeights defaults();
  void validate() const;
};

/// Bounds on h = [v (world), ω (body), F] and on the wrench rates u.
struct ConstraintSet {
  Vec3d v_lb = Vec3d::Constant(-6.0), v_ub = Vec3d::Constant(6.0);
  Vec3d w_lb = Vec3d::Constant(-4.0), w_ub = Vec3d::Constant(4.0);
  Vec6d thrust_sq_lb = Vec6d::Zero(), thrust_sq_ub = Vec6d::Constant(625.0);
  Vec6d u_lb = (Vec6d() << -150, -150, -150, -15, -15, -15).finished();
  Vec6d u_ub = (Vec6d() << 150, 150, 150, 15, 15, 15).finished();

  Vec12d h_lb() const;
  Vec12d h_ub() const;
  void validate() const;
};

enum class WarmStart { kNone, kReuse, kShift };

struct SolverConfig {
  double horizon = 1.0;  // s
  int stages = 20;
  int max_iterations = 1;
  double kkt_tolerance = 1e-6;
  double penalty_weight = 1e3;
  WarmStart warm_start = WarmStart::kReuse;

  double stage_dt() const { return horizon / stages; }
  void validate() const;
};

/// [p_ref - p, q_err, v_ref - v, ω_ref - ω, f_a, τ_a].
template <class DX>
Eigen::Matrix<typename DX::Scalar, 18, 1> stage_error(const Eigen::MatrixBase<DX>& x,
                                                      const ReferencePoint& ref) {
  using S = typename DX::Scalar;
  Eigen::Matrix<S, 18, 1> e;
  e.template segment<3>(0) = ref.p.cast<S>() - x.template segment<3>(sx::kP);
  e.template segment<3>(3) = quat_error(Quat<S>(x.template segment<4>(sx::kQ)), ref.q.cast<S>());
  e.template segment<3>(6) = ref.v.cast<S>() - x.template segment<3>(sx::kV);
  e.template segment<3>(9) = ref.w.cast<S>() - x.template segment<3>(sx::kW);
  e.template segment<6>(12) = x.template segment<6>(sx::kF);
  return e;
}

/// The OCP seen by the SQP solver: RK4 shooting of the extended 19-state
/// model with an optional constant disturbance wrench in the dynamics.
class VehicleOcpModel {
 public:
  static constexpr int kNx = kStateDim;
  static constexpr int kNdx = kTangentDim;
  static constexpr int kNu = kWrenchDim;
  // weighted error (18), weighted control (6), penalties on v, ω, F (12)
  static constexpr int kNr = 36;

  VehicleOcpModel(const VehicleParams& params, const AllocationMatrices& mats,
                  const OcpWeights& weights, const ConstraintSet& constraints,
                  const SolverConfig& cfg);

  void set_reference(const ReferenceWindow& refs) { refs_ = refs; }
  void set_disturbance(const Vec6d& d) { disturbance_ = d; }
  const Vec6d& disturbance() const { return disturbance_; }
  const ReferenceWindow& reference() const { return refs_; }
  int stages() const { return cfg_.stages; }

  template <class S>
  StateVec<S> step(const StateVec<S>& x, const Vec6<S>& u, int /*stage*/) const {
    return rk4_step<S>(x, u, dt_, [this](const StateVec<S>& xx, const Vec6<S>& uu) {
      return dynamics_nominal(xx, uu, params_, disturbance_);
    });
  }

  template <class S>
  StateVec<S> retract(const StateVec<S>& x, const TangentVec<S>& dx) const {
    return state_box_plus(x, dx);
  }

  template <class S>
  TangentVec<S> difference(const StateVec<S>& a, const StateVec<S>& b) const {
    return state_box_minus(a, b);
  }

  /// Values of h = [v, ω, F] at a state.
  template <class S>
  Eigen::Matrix<S, 12, 1> constrained_values(const StateVec<S>& x) const {
    Eigen::Matrix<S, 12, 1> h;
    h.template head<3>() = x.template segment<3>(sx::kV);
    h.template segment<3>(3) = x.template segment<3>(sx::kW);
    h.template tail<6>() = rotor_thrust_vector(x.template segment<6>(sx::kF), mats_);
    return h;
  }

  template <class S>
  Eigen::Matrix<S, kNr, 1> residual(const StateVec<S>& x, const Vec6<S>& u, int stage) const {
    Eigen::Matrix<S, kNr, 1> r;
    const bool terminal = stage >= cfg_.stages;
    const Vec18d& wq = terminal ? sqrt_terminal_ : sqrt_stage_;
    r.template head<18>() = stage_error(x, refs_[stage]).cwiseProduct(wq.cast<S>());
    if (terminal) {
      r.template segment<6>(18).setZero();
    } else {
      r.template segment<6>(18) = u.cwiseProduct(sqrt_control_.cast<S>());
    }
    const Eigen::Matrix<S, 12, 1> h = constrained_values(x);
    const S sp(sqrt_penalty_);
    for (int i = 0; i < 12; ++i) {
      if (h(i) > S(h_ub_(i))) {
        r(24 + i) = sp * (h(i) - S(h_ub_(i)));
      } else if (h(i) < S(h_lb_(i))) {
        r(24 + i) = sp * (h(i) - S(h_lb_(i)));
      } else {
        r(24 + i) = S(0);
      }
    }
    return r;
  }

  /// Σ of bound violations of h over the given nodes.
  double constraint_violation(const std::vector<StateVecd>& xs) const;

 private:
  VehicleParams params_;
  AllocationMatrices mats_;
  SolverConfig cfg_;
  double dt_;
  Vec18d sqrt_stage_, sqrt_terminal_;
  Vec6d sqrt_control_;
  Vec12d h_lb_, h_ub_;
  double sqrt_penalty_;
  ReferenceWindow refs_;
  Vec6d disturbance_ = Vec6d::Zero();
};

enum class SolveStatus { kOk, kDegraded, kFailed };

struct SolveDiagnostics {
  SolveStatus status = SolveStatus::kOk;
  int iterations = 0;
  int qp_iterations = 0;
  double kkt = 0.0;
  double cost = 0.0;
  double constraint_violation = 0.0;
  double solve_ms = 0.0;
};

struct OcpResult {
  WrenchRate u0;
  SolveDiagnostics diag;
};

/// State and control trajectories of a solved OCP.
struct OcpTrajectory {
  std::vector<StateVecd> states;
  std::vector<Vec6d> controls;
};

/// Shift by one stage, duplicating the last state and control.
OcpTrajectory shift_warm_start(const OcpTrajectory& prev);

/// Cold start: x0 replicated at every node and zero controls.
OcpTrajectory cold_start(const StateVecd& x0, int stages);

// Receding-horizon solver. Owns its model and SQP workspace; successive calls
// warm start from the previous solution according to SolverConfig.
class NmpcSolver {
 public:
  NmpcSolver(const VehicleParams& params, const AllocationMatrices& mats,
             const OcpWeights& weights, const ConstraintSet& constraints,
             const SolverConfig& cfg);

  /// Solves from x0 tracking refs (size stages+1). `disturbance` is the
  /// estimated body wrench added in the prediction model.
  OcpResult solve(const StateVecd& x0, const ReferenceWindow& refs,
                  const Vec6d& disturbance = Vec6d::Zero());

  OcpTrajectory trajectory() const;
  void set_initial_guess(const OcpTrajectory& guess);
  void reset() { has_solution_ = false; }

  const SolverConfig& config() const { return cfg_; }
  const VehicleOcpModel& model() const { return model_; }
  MultipleShootingSqp<VehicleOcpModel>& sqp() { return sqp_; }

 private:
  SolverConfig cfg_;
  VehicleOcpModel model_;
  MultipleShootingSqp<VehicleOcpModel> sqp_;
  bool has_solution_ = false;
};

/// One-shot solve from a cold start.
OcpResult solve_ocp(const StateVecd& x0, const ReferenceWindow& refs,
                    const OcpWeights& weights, const ConstraintSet& constraints,
                    const SolverConfig& cfg, const VehicleParams& params,
                    const AllocationMatrices& mats);

/// One-shot solve with the estimated disturbance wrench (f_EKF, τ_EKF) added
/// to the actuator wrench in the prediction model.
OcpResult solve_ocp_ekf(const StateVecd& x0, const ReferenceWindow& refs,
                        const Vec3d& f_ekf, const Vec3d& tau_ekf,
                        const OcpWeights& weights, const ConstraintSet& constraints,
                        const SolverConfig& cfg, const VehicleParams& params,
                        const AllocationMatrices& mats);

}  // namespace l1mpc

#endif  // L1MPC_NMPC_HPP_
