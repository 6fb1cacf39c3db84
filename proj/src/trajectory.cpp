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

#include "l1mpc/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace l1mpc {

namespace {

// Value and first two derivatives of a·sin(kωt + φ).
struct Wave {
  double f, df, ddf;
};

Wave sine(double a, double k, double w, double t, double phase) {
  const double arg = k * w * t + phase;
  const double kw = k * w;
  return {a * std::sin(arg), a * kw * std::cos(arg), -a * kw * kw * std::sin(arg)};
}

}  // namespace

void TrajectorySpec::validate() const {
  if (!(period > 0.0)) throw std::invalid_argument("trajectory period must be positive");
  if (!position_amplitude.allFinite() || !attitude_amplitude.allFinite()) {
    throw std::invalid_argument("trajectory amplitudes must be finite");
  }
  if ((attitude_amplitude.cwiseAbs().array() >= M_PI / 2.0).any()) {
    throw std::invalid_argument("attitude amplitudes must stay below 90 degrees");
  }
}

TrajectorySample sample_trajectory(double t, const TrajectorySpec& spec) {
  const double w = 2.0 * M_PI / spec.period;
  TrajectorySample s;

  const Wave x = sine(spec.position_amplitude.x(), 1.0, w, t, spec.position_phase.x());
  // sin ωt cos ωt = ½ sin 2ωt
  const Wave y = sine(0.5 * spec.position_amplitude.y(), 2.0, w, t, 2.0 * spec.position_phase.y());
  const Wave z = sine(spec.position_amplitude.z(), 1.0, w, t, spec.position_phase.z());
  s.ref.p = Vec3d(x.f, y.f, spec.z0 + z.f);
  s.ref.v = Vec3d(x.df, y.df, z.df);
  s.accel = Vec3d(x.ddf, y.ddf, z.ddf);

  const Wave r = sine(spec.attitude_amplitude.x(), 1.0, w, t, spec.attitude_phase.x());
  const Wave p = sine(spec.attitude_amplitude.y(), 2.0, w, t, spec.attitude_phase.y());
  const Wave h = sine(spec.attitude_amplitude.z(), 1.0, w, t, spec.attitude_phase.z());
  s.ref.q = quat_from_euler(r.f, p.f, h.f);

  // ZYX Euler rates to body rates, and their time derivative.
  const double sr = std::sin(r.f), cr = std::cos(r.f);
  const double sp = std::sin(p.f), cp = std::cos(p.f);
  s.ref.w = Vec3d(r.df - h.df * sp,
                  p.df * cr + h.df * sr * cp,
                  -p.df * sr + h.df * cr * cp);
  s.ang_accel = Vec3d(
      r.ddf - h.ddf * sp - h.df * cp * p.df,
      p.ddf * cr - p.df * sr * r.df + h.ddf * sr * cp + h.df * (cr * r.df * cp - sr * sp * p.df),
      -p.ddf * sr - p.df * cr * r.df + h.ddf * cr * cp -
          h.df * (sr * r.df * cp + cr * sp * p.df));
  return s;
}

ReferenceWindow reference_window(double t, double dt, int stages, const TrajectorySpec& spec) {
  ReferenceWindow win(stages + 1);
  for (int k = 0; k <= stages; ++k) win[k] = reference(t + k * dt, spec);
  // Keep adjacent quaternions in the same hemisphere.
  for (int k = 1; k <= stages; ++k) {
    if (win[k].q.dot(win[k - 1].q) < 0.0) win[k].q = -win[k].q;
  }
  return win;
}

}  // namespace l1mpc
