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

#ifndef L1MPC_TRAJECTORY_HPP_
#define L1MPC_TRAJECTORY_HPP_

#include "l1mpc/math.hpp"
#include "l1mpc/nmpc.hpp"

namespace l1mpc {

// Periodic 6-DOF figure: lemniscate in XY, sinusoid in Z, independent
// roll / pitch / yaw sinusoids (ZYX Euler). With ω = 2π/period and phases
// added to ωt per channel:
//   x = a_x sin ωt,  y = a_y sin ωt cos ωt,  z = z0 + a_z sin ωt
//   roll = a_r sin ωt,  pitch = a_p sin 2ωt,  yaw = a_y sin ωt
struct TrajectorySpec {
  double period = 15.0;                             // s
  Vec3d position_amplitude = Vec3d(2.0, 2.0, 0.5);  // m
  double z0 = -2.0;                                 // m (NED, up is negative)
  Vec3d attitude_amplitude =                        // rad, roll / pitch / yaw
      Vec3d(M_PI / 3.0, M_PI / 3.0, M_PI / 6.0);
  Vec3d position_phase = Vec3d::Zero();  // rad
  Vec3d attitude_phase = Vec3d::Zero();  // rad

  void validate() const;
};

struct TrajectorySample {
  ReferencePoint ref;
  Vec3d accel = Vec3d::Zero();      // world
  Vec3d ang_accel = Vec3d::Zero();  // body
};

/// Exact sample at time t >= 0; derivatives are analytic.
TrajectorySample sample_trajectory(double t, const TrajectorySpec& spec);

inline ReferencePoint reference(double t, const TrajectorySpec& spec) {
  return sample_trajectory(t, spec).ref;
}

/// N+1 samples at t, t+dt, ..., t+N·dt.
ReferenceWindow reference_window(double t, double dt, int stages, const TrajectorySpec& spec);

}  // namespace l1mpc

#endif  // L1MPC_TRAJECTORY_HPP_
