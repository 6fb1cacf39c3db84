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

#include "l1mpc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace l1mpc {

ActuatorGeometry ActuatorGeometry::hexacopter() {
  ActuatorGeometry g;
  for (int i = 0; i < kNumRotors; ++i) {
    g.azimuth[i] = i * std::numbers::pi / 3.0;
    g.spin[i] = (i % 2 == 0) ? 1 : -1;
  }
  return g;
}

void ActuatorGeometry::validate() const {
  if (!(thrust_coeff > 0.0) || !(drag_coeff > 0.0)) {
    throw std::invalid_argument("rotor coefficients must be positive");
  }
  if (!(arm_length > 0.0)) {
    throw std::invalid_argument("arm length must be positive");
  }
  if (!(omega_min >= 0.0) || !(omega_max > omega_min)) {
    throw std::invalid_argument("rotor speed bounds must satisfy 0 <= min < max");
  }
  for (int s : spin) {
    if (s != 1 && s != -1) {
      throw std::invalid_argument("spin direction must be +1 or -1");
    }
  }
}

AllocationMatrices build_matrices(const ActuatorGeometry& geom) {
  geom.validate();
  AllocationMatrices m;
  m.geometry = geom;
  const double mu = geom.thrust_coeff;
  const double k = geom.drag_coeff;
  for (int i = 0; i < kNumRotors; ++i) {
    const double cg = std::cos(geom.azimuth[i]);
    const double sg = std::sin(geom.azimuth[i]);
    const Vec3d pos = geom.arm_length * Vec3d(cg, sg, 0.0);
    // Thrust direction d(α) = s·[-sin γ, cos γ, 0] + c·[0, 0, -1].
    const Vec3d dir_s(-sg, cg, 0.0);
    const Vec3d dir_c(0.0, 0.0, -1.0);
    const double spin = geom.spin[i];
    // Columns act on thrust-scaled inputs μΩ²s and μΩ²c.
    m.effectiveness.col(2 * i) << dir_s, pos.cross(dir_s) + spin * (k / mu) * dir_s;
    m.effectiveness.col(2 * i + 1) << dir_c, pos.cross(dir_c) + spin * (k / mu) * dir_c;
  }
  Eigen::JacobiSVD<Mat6x12d> svd(m.effectiveness, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(5) > 1e-9 * sv(0))) {
    throw std::invalid_argument("allocation matrix is rank deficient");
  }
  m.effectiveness_pinv = svd.solve(Mat6d::Identity());
  m.force_allocation = m.effectiveness;
  m.force_allocation_pinv = m.effectiveness_pinv;
  return m;
}

void rotor_from_pair(double s_part, double c_part, double& omega, double& tilt) {
  omega = std::pow(s_part * s_part + c_part * c_part, 0.25);
  tilt = (s_part == 0.0 && c_part == 0.0) ? 0.0 : std::atan2(s_part, c_part);
  if (tilt <= -std::numbers::pi) tilt += 2.0 * std::numbers::pi;
}

namespace {

ActuatorCommand extract(const Vec6d& wrench, const AllocationMatrices& mats,
                        bool mismatched) {
  const ActuatorGeometry& g = mats.geometry;
  const Vec12d u = mats.effectiveness_pinv * wrench / g.thrust_coeff;
  ActuatorCommand cmd;
  for (int i = 0; i < kNumRotors; ++i) {
    double omega = 0.0;
    double tilt = 0.0;
    rotor_from_pair(u(2 * i), u(2 * i + 1), omega, tilt);
    if (mismatched) omega = omega * omega;
    if (omega > g.omega_max || omega < g.omega_min) {
      cmd.saturated = true;
      omega = std::clamp(omega, g.omega_min, g.omega_max);
    }
    cmd.omega(i) = omega;
    cmd.tilt(i) = tilt;
  }
  return cmd;
}

}  // namespace

ActuatorCommand allocate(const Vec6d& wrench, const AllocationMatrices& mats) {
  return extract(wrench, mats, false);
}

ActuatorCommand allocate_mismatched(const Vec6d& wrench, const AllocationMatrices& mats) {
  return extract(wrench, mats, true);
}

Vec12d substituted_inputs(const ActuatorCommand& cmd, const ActuatorGeometry& geom) {
  Vec12d u;
  for (int i = 0; i < kNumRotors; ++i) {
    const double thrust = geom.thrust_coeff * cmd.omega(i) * cmd.omega(i);
    u(2 * i) = thrust * std::sin(cmd.tilt(i));
    u(2 * i + 1) = thrust * std::cos(cmd.tilt(i));
  }
  return u;
}

Vec6d command_wrench(const ActuatorCommand& cmd, const AllocationMatrices& mats) {
  return mats.effectiveness * substituted_inputs(cmd, mats.geometry);
}

Vec6d rotor_wrench(int rotor, double omega, double tilt, const ActuatorGeometry& geom) {
  const double gamma = geom.azimuth.at(rotor);
  const Vec3d arm(std::cos(gamma), std::sin(gamma), 0.0);
  const Vec3d dir = rotate(Vec3d(0.0, 0.0, -1.0), quat_from_axis_angle<double>(arm, tilt));
  const double w2 = omega * omega;
  const Vec3d force = geom.thrust_coeff * w2 * dir;
  Vec6d out;
  out << force,
      (geom.arm_length * arm).cross(force) + geom.spin[rotor] * geom.drag_coeff * w2 * dir;
  return out;
}

}  // namespace l1mpc
