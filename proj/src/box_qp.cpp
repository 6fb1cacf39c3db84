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

#include "l1mpc/box_qp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace l1mpc {

namespace {

enum class Bound : signed char { kFree = 0, kLower = -1, kUpper = 1 };

}  // namespace

BoxQpResult solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                         const Eigen::VectorXd& guess, int max_iterations) {
  const int n = static_cast<int>(g.size());
  BoxQpResult res;
  res.x = guess.cwiseMax(lb).cwiseMin(ub);
  std::vector<Bound> active(n, Bound::kFree);
  for (int i = 0; i < n; ++i) {
    if (res.x(i) <= lb(i)) active[i] = Bound::kLower;
    else if (res.x(i) >= ub(i)) active[i] = Bound::kUpper;
  }

  const double scale = 1.0 + H.diagonal().cwiseAbs().maxCoeff();
  const double mult_tol = 1e-12 * scale;
  std::vector<int> free_idx;
  free_idx.reserve(n);

  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    free_idx.clear();
    for (int i = 0; i < n; ++i) {
      if (active[i] == Bound::kFree) free_idx.push_back(i);
    }
    const Eigen::VectorXd grad = H * res.x + g;

    // Minimize over the free variables with the working set held fixed.
    bool stationary = free_idx.empty();
    Eigen::VectorXd step;
    if (!stationary) {
      const Eigen::MatrixXd h_ff = H(free_idx, free_idx);
      step = h_ff.llt().solve(-grad(free_idx));
      stationary = step.cwiseAbs().maxCoeff() <=
                   1e-14 * (1.0 + res.x(free_idx).cwiseAbs().maxCoeff());
    }

    if (!stationary) {
      double alpha = 1.0;
      int blocking = -1;
      Bound blocking_side = Bound::kFree;
      for (std::size_t j = 0; j < free_idx.size(); ++j) {
        const int i = free_idx[j];
        if (step(j) < 0.0) {
          const double a = (lb(i) - res.x(i)) / step(j);
          if (a < alpha) { alpha = a; blocking = i; blocking_side = Bound::kLower; }
        } else if (step(j) > 0.0) {
          const double a = (ub(i) - res.x(i)) / step(j);
          if (a < alpha) { alpha = a; blocking = i; blocking_side = Bound::kUpper; }
        }
      }
      alpha = std::max(alpha, 0.0);
      for (std::size_t j = 0; j < free_idx.size(); ++j) {
        res.x(free_idx[j]) += alpha * step(j);
      }
      if (blocking >= 0) {
        active[blocking] = blocking_side;
        res.x(blocking) = blocking_side == Bound::kLower ? lb(blocking) : ub(blocking);
        continue;
      }
    }

    // On the optimum of the current face: release the bound with the most
    // negative multiplier, or stop.
    const Eigen::VectorXd grad_now = H * res.x + g;
    int release = -1;
    double worst = -mult_tol;
    for (int i = 0; i < n; ++i) {
      if (active[i] == Bound::kFree) continue;
      const double lambda = active[i] == Bound::kLower ? grad_now(i) : -grad_now(i);
      if (lambda < worst) { worst = lambda; release = i; }
    }
    if (release < 0) {
      res.converged = true;
      ++res.iterations;
      return res;
    }
    active[release] = Bound::kFree;
  }
  return res;
}

}  // namespace l1mpc
