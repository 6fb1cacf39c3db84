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

#include "l1mpc/nmpc.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace l1mpc {

OcpWeights OcpWeights::defaults() {
  OcpWeights w;
  w.stage << Vec3d::Constant(40.0), Vec3d::Constant(40.0), Vec3d::Constant(4.0),
      Vec3d::Constant(4.0), Vec6d::Constant(1e-3);
  w.control = Vec6d::Constant(1e-4);
  w.terminal = w.stage;
  w.terminal.head<12>() *= 10.0;
  return w;
}

void OcpWeights::validate() const {
  if ((stage.array() < 0.0).any() || (control.array() < 0.0).any() ||
      (terminal.array() < 0.0).any()) {
    throw std::invalid_argument("OCP weights must be non-negative");
  }
}

Vec12d ConstraintSet::h_lb() const {
  Vec12d h;
  h << v_lb, w_lb, thrust_sq_lb;
  return h;
}

Vec12d ConstraintSet::h_ub() const {
  Vec12d h;
  h << v_ub, w_ub, thrust_sq_ub;
  return h;
}

void ConstraintSet::validate() const {
  if ((h_lb().array() > h_ub().array()).any() || (u_lb.array() > u_ub.array()).any()) {
    throw std::invalid_argument("constraint lower bound exceeds upper bound");
  }
}

void SolverConfig::validate() const {
  if (stages < 2) throw std::invalid_argument("OCP needs at least 2 stages");
  if (!(horizon > 0.0)) throw std::invalid_argument("OCP horizon must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(penalty_weight >= 0.0)) throw std::invalid_argument("penalty weight must be >= 0");
}

VehicleOcpModel::VehicleOcpModel(const VehicleParams& params, const AllocationMatrices& mats,
                                 const OcpWeights& weights, const ConstraintSet& constraints,
                                 const SolverConfig& cfg)
    : params_(params), mats_(mats), cfg_(cfg), dt_(cfg.stage_dt()) {
  params.validate();
  weights.validate();
  constraints.validate();
  cfg.validate();
  sqrt_stage_ = weights.stage.cwiseSqrt();
  sqrt_terminal_ = weights.terminal.cwiseSqrt();
  sqrt_control_ = weights.control.cwiseSqrt();
  h_lb_ = constraints.h_lb();
  h_ub_ = constraints.h_ub();
  sqrt_penalty_ = std::sqrt(cfg.penalty_weight);
}

double VehicleOcpModel::constraint_violation(const std::vector<StateVecd>& xs) const {
  double v = 0.0;
  for (const auto& x : xs) {
    const Vec12d h = constrained_values<double>(x);
    v += (h - h_ub_).cwiseMax(0.0).sum() + (h_lb_ - h).cwiseMax(0.0).sum();
  }
  return v;
}

OcpTrajectory shift_warm_start(const OcpTrajectory& prev) {
  OcpTrajectory out = prev;
  if (!out.states.empty()) {
    std::rotate(out.states.begin(), out.states.begin() + 1, out.states.end());
    out.states.back() = prev.states.back();
  }
  if (!out.controls.empty()) {
    std::rotate(out.controls.begin(), out.controls.begin() + 1, out.controls.end());
    out.controls.back() = prev.controls.back();
  }
  return out;
}

OcpTrajectory cold_start(const StateVecd& x0, int stages) {
  OcpTrajectory t;
  t.states.assign(stages + 1, x0);
  t.controls.assign(stages, Vec6d::Zero());
  return t;
}

namespace {

SqpSettings sqp_settings(const SolverConfig& cfg) {
  SqpSettings s;
  s.max_iterations = cfg.max_iterations;
  s.kkt_tolerance = cfg.kkt_tolerance;
  return s;
}

}  // namespace

NmpcSolver::NmpcSolver(const VehicleParams& params, const AllocationMatrices& mats,
                       const OcpWeights& weights, const ConstraintSet& constraints,
                       const SolverConfig& cfg)
    : cfg_(cfg),
      model_(params, mats, weights, constraints, cfg),
      sqp_(cfg.stages, sqp_settings(cfg)) {
  sqp_.set_control_bounds(constraints.u_lb, constraints.u_ub);
}

OcpTrajectory NmpcSolver::trajectory() const {
  return OcpTrajectory{sqp_.states(), sqp_.controls()};
}

void NmpcSolver::set_initial_guess(const OcpTrajectory& guess) {
  if (static_cast<int>(guess.states.size()) != cfg_.stages + 1 ||
      static_cast<int>(guess.controls.size()) != cfg_.stages) {
    throw std::invalid_argument("initial guess has the wrong number of stages");
  }
  sqp_.states() = guess.states;
  sqp_.controls() = guess.controls;
  has_solution_ = true;
}

OcpResult NmpcSolver::solve(const StateVecd& x0, const ReferenceWindow& refs,
                            const Vec6d& disturbance) {
  if (static_cast<int>(refs.size()) != cfg_.stages + 1) {
    throw std::invalid_argument("reference window must hold stages + 1 samples");
  }
  const auto t0 = std::chrono::steady_clock::now();
  model_.set_reference(refs);
  model_.set_disturbance(disturbance);

  if (!has_solution_ || cfg_.warm_start == WarmStart::kNone) {
    const OcpTrajectory cold = cold_start(x0, cfg_.stages);
    sqp_.states() = cold.states;
    sqp_.controls() = cold.controls;
  } else if (cfg_.warm_start == WarmStart::kShift) {
    const OcpTrajectory shifted = shift_warm_start(trajectory());
    sqp_.states() = shifted.states;
    sqp_.controls() = shifted.controls;
  }

  const SqpReport rep = sqp_.solve(model_, x0);

  OcpResult res;
  res.diag.iterations = rep.iterations;
  res.diag.qp_iterations = rep.qp_iterations;
  res.diag.kkt = rep.kkt;
  res.diag.cost = rep.cost_final;
  const Vec6d u0 = sqp_.controls().front();
  const bool finite = rep.status != SqpStatus::kNonFinite && u0.allFinite() &&
                      std::isfinite(rep.cost_final);
  if (!finite) {
    res.diag.status = SolveStatus::kFailed;
    has_solution_ = false;
  } else {
    res.u0.df = u0.head<3>();
    res.u0.dtau = u0.tail<3>();
    const bool unconverged = rep.status == SqpStatus::kMaxIterations && cfg_.max_iterations > 1;
    res.diag.status = (rep.status == SqpStatus::kLineSearchFailed || unconverged)
                          ? SolveStatus::kDegraded
                          : SolveStatus::kOk;
    res.diag.constraint_violation = model_.constraint_violation(sqp_.states());
    has_solution_ = true;
  }
  res.diag.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

OcpResult solve_ocp(const StateVecd& x0, const ReferenceWindow& refs,
                    const OcpWeights& weights, const ConstraintSet& constraints,
                    const SolverConfig& cfg, const VehicleParams& params,
                    const AllocationMatrices& mats) {
  NmpcSolver solver(params, mats, weights, constraints, cfg);
  return solver.solve(x0, refs);
}

OcpResult solve_ocp_ekf(const StateVecd& x0, const ReferenceWindow& refs,
                        const Vec3d& f_ekf, const Vec3d& tau_ekf,
                        const OcpWeights& weights, const ConstraintSet& constraints,
                        const SolverConfig& cfg, const VehicleParams& params,
                        const AllocationMatrices& mats) {
  NmpcSolver solver(params, mats, weights, constraints, cfg);
  Vec6d d;
  d << f_ekf, tau_ekf;
  return solver.solve(x0, refs, d);
}

}  // namespace l1mpc
