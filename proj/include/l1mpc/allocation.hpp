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

#ifndef L1MPC_ALLOCATION_HPP_
#define L1MPC_ALLOCATION_HPP_

#include <array>

#include <Eigen/Dense>

#include "l1mpc/math.hpp"

namespace l1mpc {

inline constexpr int kNumRotors = 6;

using Vec12d = Eigen::Matrix<double, 12, 1>;
using Mat6x12d = Eigen::Matrix<double, 6, 12>;
using Mat12x6d = Eigen::Matrix<double, 12, 6>;

// Six tilting arms in the body XY plane. Rotor i sits at
// l·[cos γ_i, sin γ_i, 0]; at zero tilt it thrusts along body -Z, and a
// positive tilt rotates the thrust axis about the outward arm axis by the
// right-hand rule.
struct ActuatorGeometry {
  std::array<double, kNumRotors> azimuth{};  // rad
  std::array<int, kNumRotors> spin{};        // +1 / -1
  double arm_length = 0.3;                   // m
  double thrust_coeff = 1.5e-5;              // μ, N·s²
  double drag_coeff = 2.4e-7;                // k, N·m·s²
  double omega_min = 0.0;                    // rad/s
  double omega_max = 1300.0;                 // rad/s

  /// 60° spacing starting on the body X axis, alternating spin.
  static ActuatorGeometry hexacopter();

  void validate() const;
};

struct ActuatorCommand {
  Vec6d omega = Vec6d::Zero();  // rad/s
  Vec6d tilt = Vec6d::Zero();   // rad, in (-π, π]
  bool saturated = false;
};

// M_c maps the thrust-scaled U = [μΩ₁²s₁, μΩ₁²c₁, …, μΩ₆²s₆, μΩ₆²c₆] to the
// body wrench; the drag-to-thrust ratio k/μ is carried by its columns. The
// force allocation matrix B of the thrust constraint is the same matrix, so
// F_j is the squared thrust of rotor j.
struct AllocationMatrices {
  ActuatorGeometry geometry;
  Mat6x12d effectiveness;
  Mat12x6d effectiveness_pinv;
  Mat6x12d force_allocation;
  Mat12x6d force_allocation_pinv;
};

/// Throws std::invalid_argument on invalid or rank-deficient geometry.
AllocationMatrices build_matrices(const ActuatorGeometry& geom);

/// Rotor speed and tilt from one (Ω²s, Ω²c) pair with μ already divided
/// out. atan2(0, 0) is taken as 0.
void rotor_from_pair(double s_part, double c_part, double& omega, double& tilt);

/// Least-squares actuator command for a body wrench. Speeds outside the
/// geometry bounds are clamped and flagged.
ActuatorCommand allocate(const Vec6d& wrench, const AllocationMatrices& mats);

/// Allocation with the square root in place of the fourth root when
/// recovering rotor speed; only used to model a mismatched plant.
ActuatorCommand allocate_mismatched(const Vec6d& wrench, const AllocationMatrices& mats);

/// Substituted actuator vector U for a command.
Vec12d substituted_inputs(const ActuatorCommand& cmd, const ActuatorGeometry& geom);

/// Body wrench produced by a command through M_c.
Vec6d command_wrench(const ActuatorCommand& cmd, const AllocationMatrices& mats);

/// Body wrench of a single rotor evaluated from its geometry.
Vec6d rotor_wrench(int rotor, double omega, double tilt, const ActuatorGeometry& geom);

/// F_j = y_{2j-1}² + y_{2j}² with y = B†·wrench.
template <class D>
Vec6<typename D::Scalar> rotor_thrust_vector(const Eigen::MatrixBase<D>& wrench,
                                             const AllocationMatrices& mats) {
  using S = typename D::Scalar;
  const Eigen::Matrix<S, 12, 1> y =
      mats.force_allocation_pinv.template cast<S>() * wrench;
  Vec6<S> f;
  for (int j = 0; j < kNumRotors; ++j) {
    f(j) = y(2 * j) * y(2 * j) + y(2 * j + 1) * y(2 * j + 1);
  }
  return f;
}

}  // namespace l1mpc

#endif  // L1MPC_ALLOCATION_HPP_
