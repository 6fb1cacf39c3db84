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

#ifndef L1MPC_BOX_QP_HPP_
#define L1MPC_BOX_QP_HPP_

#include <Eigen/Dense>

namespace l1mpc {

struct BoxQpResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
};

// Primal active-set method for
//   min ½xᵀHx + gᵀx  s.t.  lb <= x <= ub
// with H symmetric positive definite. `guess` is projected onto the box and
// used as the starting point; bounds it touches seed the working set.
BoxQpResult solve_box_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                         const Eigen::VectorXd& guess, int max_iterations = 200);

}  // namespace l1mpc

#endif  // L1MPC_BOX_QP_HPP_
