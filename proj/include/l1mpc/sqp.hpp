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

#ifndef L1MPC_SQP_HPP_
#define L1MPC_SQP_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

#include "l1mpc/box_qp.hpp"

namespace l1mpc {

/// Forward-mode dual number with N fixed derivative directions.
template <int N>
using Jet = Eigen::AutoDiffScalar<Eigen::Matrix<double, N, 1>>;

struct SqpSettings {
  int max_iterations = 1;
  double kkt_tolerance = 1e-6;
  double regularization = 1e-9;
  double defect_weight = 10.0;
  int max_backtracks = 8;
  double backtrack_factor = 0.5;
  double armijo = 1e-4;
};

enum class SqpStatus { kConverged, kMaxIterations, kLineSearchFailed, kNonFinite };

struct SqpReport {
  SqpStatus status = SqpStatus::kMaxIterations;
  int iterations = 0;
  int qp_iterations = 0;
  double kkt = 0.0;
  // Both merits use the defect penalty of the first line search.
  double merit_initial = 0.0;
  double merit_final = 0.0;
  double cost_final = 0.0;
};

// Gauss-Newton SQP over a direct multiple-shooting transcription
//
//   min  Σ_k ‖r_k(x_k, u_k)‖² + ‖r_N(x_N)‖²
//   s.t. x_{k+1} = step(x_k, u_k),  x_0 fixed,  u_lb <= u_k <= u_ub
//
// States may live on a manifold: the model supplies retract / difference for
// its tangent chart and every Jacobian is taken with respect to tangent
// perturbations, obtained by forward-mode automatic differentiation of the
// model's scalar-templated functions. The QP is condensed onto the controls
// and solved with a box-constrained active-set method; steps are globalized
// by backtracking on Σ‖r‖² + ρ·Σ‖defect‖₁.
//
// A Model provides
//   static constexpr int kNx, kNdx, kNu, kNr;
//   template <class S> Matrix<S,kNx,1> step(x, u, int stage) const;
//   template <class S> Matrix<S,kNx,1> retract(x, dx) const;
//   template <class S> Matrix<S,kNdx,1> difference(a, b) const;   // a ⊟ b
//   template <class S> Matrix<S,kNr,1> residual(x, u, int stage) const;
// where residual(·, ·, N) is the terminal residual and ignores u.
template <class Model>
class MultipleShootingSqp {
 public:
  static constexpr int NX = Model::kNx;
  static constexpr int NDX = Model::kNdx;
  static constexpr int NU = Model::kNu;
  static constexpr int NR = Model::kNr;
  static constexpr int ND = NDX + NU;

  using State = Eigen::Matrix<double, NX, 1>;
  using Tangent = Eigen::Matrix<double, NDX, 1>;
  using Control = Eigen::Matrix<double, NU, 1>;
  using Residual = Eigen::Matrix<double, NR, 1>;

  MultipleShootingSqp(int stages, const SqpSettings& settings)
      : n_(stages), settings_(settings) {
    if (stages < 1) throw std::invalid_argument("need at least one shooting interval");
    xs_.assign(n_ + 1, State::Zero());
    us_.assign(n_, Control::Zero());
    A_.resize(n_);
    B_.resize(n_);
    d_.resize(n_);
    r_.resize(n_ + 1);
    jx_.resize(n_ + 1);
    ju_.resize(n_);
    u_lb_ = Control::Constant(-std::numeric_limits<double>::infinity());
    u_ub_ = Control::Constant(std::numeric_limits<double>::infinity());
  }

  int stages() const { return n_; }
  std::vector<State>& states() { return xs_; }
  const std::vector<State>& states() const { return xs_; }
  std::vector<Control>& controls() { return us_; }
  const std::vector<Control>& controls() const { return us_; }
  const SqpSettings& settings() const { return settings_; }
  SqpSettings& settings() { return settings_; }

  void set_control_bounds(const Control& lb, const Control& ub) {
    if ((lb.array() > ub.array()).any()) {
      throw std::invalid_argument("control lower bound exceeds upper bound");
    }
    u_lb_ = lb;
    u_ub_ = ub;
  }

  /// Objective Σ‖r‖² of the current iterate (defects ignored).
  double cost(const Model& model) const {
    double c = 0.0;
    for (int k = 0; k < n_; ++k) c += model.template residual<double>(xs_[k], us_[k], k).squaredNorm();
    c += model.template residual<double>(xs_[n_], Control::Zero(), n_).squaredNorm();
    return c;
  }

  /// Runs up to max_iterations SQP iterations from the current iterate with
  /// the initial node pinned to x0.
  SqpReport solve(const Model& model, const State& x0) {
    SqpReport rep;
    xs_[0] = x0;
    for (auto& u : us_) u = u.cwiseMax(u_lb_).cwiseMin(u_ub_);
    rho_ = settings_.defect_weight;
    rep.merit_initial = merit(model, xs_, us_);
    rep.merit_final = rep.merit_initial;
    if (!std::isfinite(rep.merit_initial)) {
      rep.status = SqpStatus::kNonFinite;
      return rep;
    }

    for (int it = 0; it < settings_.max_iterations; ++it) {
      linearize(model);
      condense();
      rep.kkt = kkt_residual();
      if (!std::isfinite(rep.kkt)) {
        rep.status = SqpStatus::kNonFinite;
        return rep;
      }
      if (rep.kkt < settings_.kkt_tolerance) {
        rep.status = SqpStatus::kConverged;
        break;
      }

      const int nu_total = NU * n_;
      Eigen::VectorXd lb(nu_total), ub(nu_total);
      for (int k = 0; k < n_; ++k) {
        lb.segment<NU>(NU * k) = u_lb_ - us_[k];
        ub.segment<NU>(NU * k) = u_ub_ - us_[k];
      }
      const BoxQpResult qp = solve_box_qp(H_, g_, lb.cwiseMin(0.0), ub.cwiseMax(0.0),
                                          Eigen::VectorXd::Zero(nu_total));
      rep.qp_iterations += qp.iterations;
      ++rep.iterations;
      if (!qp.x.allFinite()) {
        rep.status = SqpStatus::kNonFinite;
        return rep;
      }

      // Tangent steps of the nodes from the linearized dynamics.
      std::vector<Tangent> dx(n_ + 1, Tangent::Zero());
      for (int k = 0; k < n_; ++k) {
        dx[k + 1] = A_[k] * dx[k] + B_[k] * qp.x.segment<NU>(NU * k) + d_[k];
      }

      // The defect penalty must dominate the multipliers for the step to be
      // a descent direction of the merit function.
      rho_ = std::max(settings_.defect_weight, 2.0 * max_multiplier(dx, qp.x));
      const double phi0 = merit(model, xs_, us_);
      const double slope = merit_slope(dx, qp.x);
      if (it == 0) rep.merit_initial = rep.merit_final = phi0;

      double alpha = 1.0;
      bool accepted = false;
      std::vector<State> xt(n_ + 1);
      std::vector<Control> ut(n_);
      for (int bt = 0; bt <= settings_.max_backtracks; ++bt) {
        xt[0] = xs_[0];
        for (int k = 1; k <= n_; ++k) {
          xt[k] = model.template retract<double>(xs_[k], Tangent(alpha * dx[k]));
        }
        for (int k = 0; k < n_; ++k) {
          ut[k] = (us_[k] + alpha * qp.x.segment<NU>(NU * k)).cwiseMax(u_lb_).cwiseMin(u_ub_);
        }
        const double phi = merit(model, xt, ut);
        const double bound = slope < 0.0 ? phi0 + settings_.armijo * alpha * slope : phi0;
        if (std::isfinite(phi) && phi <= bound) {
          accepted = true;
          rep.merit_final = phi;
          break;
        }
        alpha *= settings_.backtrack_factor;
      }
      if (!accepted) {
        rep.merit_final = phi0;
        rep.status = SqpStatus::kLineSearchFailed;
        rep.cost_final = cost(model);
        return rep;
      }
      xs_.swap(xt);
      us_.swap(ut);
      rep.status = SqpStatus::kMaxIterations;
    }
    rep.cost_final = cost(model);
    return rep;
  }

  // Linearization and condensed QP data of the last iteration, exposed for
  // testing against independent QP solvers.
  const Eigen::MatrixXd& condensed_hessian() const { return H_; }
  const Eigen::VectorXd& condensed_gradient() const { return g_; }

  void linearize(const Model& model) {
    using J = Jet<ND>;
    for (int k = 0; k <= n_; ++k) {
      Eigen::Matrix<J, NDX, 1> dx;
      for (int i = 0; i < NDX; ++i) dx(i) = J(0.0, ND, i);
      Eigen::Matrix<J, NU, 1> u;
      const Control u_val = k < n_ ? us_[k] : Control::Zero();
      for (int i = 0; i < NU; ++i) u(i) = J(u_val(i), ND, NDX + i);
      const Eigen::Matrix<J, NX, 1> xk_j = xs_[k].template cast<J>();
      const Eigen::Matrix<J, NX, 1> xp = model.template retract<J>(xk_j, dx);

      const Eigen::Matrix<J, NR, 1> r = model.template residual<J>(xp, u, k);
      for (int i = 0; i < NR; ++i) {
        r_[k](i) = r(i).value();
        jx_[k].row(i) = r(i).derivatives().template head<NDX>().transpose();
        if (k < n_) ju_[k].row(i) = r(i).derivatives().template tail<NU>().transpose();
      }
      if (k == n_) break;

      const Eigen::Matrix<J, NX, 1> next = model.template step<J>(xp, u, k);
      const Eigen::Matrix<J, NDX, 1> def =
          model.template difference<J>(next, xs_[k + 1].template cast<J>());
      for (int i = 0; i < NDX; ++i) {
        d_[k](i) = def(i).value();
        A_[k].row(i) = def(i).derivatives().template head<NDX>().transpose();
        B_[k].row(i) = def(i).derivatives().template tail<NU>().transpose();
      }
    }
  }

 private:
  double merit(const Model& model, const std::vector<State>& xs,
               const std::vector<Control>& us) const {
    double m = 0.0;
    for (int k = 0; k < n_; ++k) {
      m += model.template residual<double>(xs[k], us[k], k).squaredNorm();
      const State next = model.template step<double>(xs[k], us[k], k);
      m += rho_ * model.template difference<double>(next, xs[k + 1]).template lpNorm<1>();
    }
    m += model.template residual<double>(xs[n_], Control::Zero(), n_).squaredNorm();
    return m;
  }

  // Directional derivative of the merit along the QP step.
  double merit_slope(const std::vector<Tangent>& dx, const Eigen::VectorXd& du) const {
    double s = 0.0;
    for (int k = 0; k < n_; ++k) {
      s += 2.0 * r_[k].dot(jx_[k] * dx[k] + ju_[k] * du.segment<NU>(NU * k));
      s -= rho_ * d_[k].template lpNorm<1>();
    }
    s += 2.0 * r_[n_].dot(jx_[n_] * dx[n_]);
    return s;
  }

  // Largest multiplier of the linearized continuity constraints.
  double max_multiplier(const std::vector<Tangent>& dx, const Eigen::VectorXd& du) const {
    Tangent lambda = 2.0 * jx_[n_].transpose() * (r_[n_] + jx_[n_] * dx[n_]);
    double m = lambda.cwiseAbs().maxCoeff();
    for (int k = n_ - 1; k >= 1; --k) {
      const Residual rl = r_[k] + jx_[k] * dx[k] + ju_[k] * du.segment<NU>(NU * k);
      lambda = 2.0 * jx_[k].transpose() * rl + A_[k].transpose() * lambda;
      m = std::max(m, lambda.cwiseAbs().maxCoeff());
    }
    return m;
  }

  // Eliminates the node steps: dx_k = G_k du + c_k with dx_0 = 0.
  void condense() {
    const int nu_total = NU * n_;
    H_.setZero(nu_total, nu_total);
    g_.setZero(nu_total);
    Eigen::Matrix<double, NDX, Eigen::Dynamic> G =
        Eigen::Matrix<double, NDX, Eigen::Dynamic>::Zero(NDX, nu_total);
    Tangent c = Tangent::Zero();
    Eigen::Matrix<double, NR, Eigen::Dynamic> W(NR, nu_total);
    for (int k = 0; k <= n_; ++k) {
      const int cols = k < n_ ? NU * (k + 1) : nu_total;
      const int past = NU * std::min(k, n_);
      W.leftCols(past).noalias() = jx_[k] * G.leftCols(past);
      if (k < n_) W.template middleCols<NU>(past) = ju_[k];
      const Residual w = r_[k] + jx_[k] * c;
      H_.topLeftCorner(cols, cols).template selfadjointView<Eigen::Lower>().rankUpdate(
          W.leftCols(cols).transpose());
      g_.head(cols).noalias() += W.leftCols(cols).transpose() * w;
      if (k == n_) break;
      G.leftCols(past) = (A_[k] * G.leftCols(past)).eval();
      G.template middleCols<NU>(past) = B_[k];
      c = A_[k] * c + d_[k];
    }
    H_.template triangularView<Eigen::StrictlyUpper>() = H_.transpose();
    H_.diagonal().array() += settings_.regularization;
  }

  // Max of the projected QP gradient at du = 0 and the defects.
  double kkt_residual() const {
    double m = 0.0;
    for (int k = 0; k < n_; ++k) m = std::max(m, d_[k].cwiseAbs().maxCoeff());
    for (int k = 0; k < n_; ++k) {
      for (int i = 0; i < NU; ++i) {
        const double gi = g_(NU * k + i);
        const bool at_lb = us_[k](i) <= u_lb_(i);
        const bool at_ub = us_[k](i) >= u_ub_(i);
        if ((at_lb && gi > 0.0) || (at_ub && gi < 0.0)) continue;
        m = std::max(m, std::abs(gi));
      }
    }
    return m;
  }

  int n_;
  SqpSettings settings_;
  std::vector<State> xs_;
  std::vector<Control> us_;
  Control u_lb_, u_ub_;
  double rho_ = 0.0;

  std::vector<Eigen::Matrix<double, NDX, NDX>> A_;
  std::vector<Eigen::Matrix<double, NDX, NU>> B_;
  std::vector<Tangent> d_;
  std::vector<Residual> r_;
  std::vector<Eigen::Matrix<double, NR, NDX>> jx_;
  std::vector<Eigen::Matrix<double, NR, NU>> ju_;
  Eigen::MatrixXd H_;
  Eigen::VectorXd g_;
};

}  // namespace l1mpc

#endif  // L1MPC_SQP_HPP_
