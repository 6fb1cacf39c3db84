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

#include "l1mpc/vehicle.hpp"

#include <stdexcept>
#include <string>

namespace l1mpc {

void VehicleParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("vehicle mass must be positive");
  }
  if (!inertia.isApprox(inertia.transpose(), 1e-12)) {
    throw std::invalid_argument("inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3d> eig(inertia, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw std::invalid_argument("inertia must be positive definite");
  }
  if (!(arm_length > 0.0) || !(com_offset.norm() < arm_length)) {
    throw std::invalid_argument("com offset must lie inside the arm radius");
  }
}

StateVecd VehicleState::to_vector() const {
  StateVecd x;
  x << p, q, v, w, f, tau;
  return x;
}

VehicleState VehicleState::from_vector(const StateVecd& x) {
  VehicleState s;
  s.p = x.segment<3>(sx::kP);
  s.q = x.segment<4>(sx::kQ);
  s.v = x.segment<3>(sx::kV);
  s.w = x.segment<3>(sx::kW);
  s.f = x.segment<3>(sx::kF);
  s.tau = x.segment<3>(sx::kT);
  return s;
}

std::string_view to_string(Group g) {
  switch (g) {
    case Group::kA: return "A";
    case Group::kB: return "B";
    case Group::kC: return "C";
    case Group::kD: return "D";
  }
  return "?";
}

Group parse_group(std::string_view s) {
  if (s == "A" || s == "a") return Group::kA;
  if (s == "B" || s == "b") return Group::kB;
  if (s == "C" || s == "c") return Group::kC;
  if (s == "D" || s == "d") return Group::kD;
  throw std::invalid_argument("unknown plant group '" + std::string(s) + "'");
}

PlantPerturbation PlantPerturbation::for_group(Group g, const Vec3d& com_shift) {
  PlantPerturbation p;
  switch (g) {
    case Group::kA:
      break;
    case Group::kB:
      p.mass_delta = -0.5;
      p.inertia_scale = 0.5;
      p.com_shift = com_shift;
      break;
    case Group::kC:
      p.mass_delta = 0.5;
      p.inertia_scale = 2.0;
      p.com_shift = com_shift;
      break;
    case Group::kD:
      p.mass_delta = 0.5;
      p.inertia_scale = 2.0;
      p.com_shift = com_shift;
      p.wrench_distortion = true;
      break;
  }
  return p;
}

VehicleParams perturbed(const VehicleParams& nominal, const PlantPerturbation& pert) {
  VehicleParams out = nominal;
  out.mass = nominal.mass + pert.mass_delta;
  out.inertia = nominal.inertia * pert.inertia_scale;
  out.com_offset = nominal.com_offset + pert.com_shift;
  out.validate();
  return out;
}

StateVecd dynamics_perturbed(const StateVecd& x, const Vec6d& u,
                             const VehicleParams& params, bool wrench_distortion) {
  if (!wrench_distortion) {
    return dynamics_nominal(x, u, params);
  }
  const Quatd q = x.segment<4>(sx::kQ);
  const Vec3d w = x.segment<3>(sx::kW);
  const Vec3d f = x.segment<3>(sx::kF);
  const Vec3d tau = x.segment<3>(sx::kT);
  const Vec3d f_eff = 0.95 * (f + f.array().sin().matrix());
  const Vec3d torque = 0.9 * (tau + tau.array().sin().matrix()) -
                       0.95 * params.com_offset.cross(f) -
                       w.cross(params.inertia * w);
  StateVecd dx;
  dx.segment<3>(sx::kP) = x.segment<3>(sx::kV);
  dx.segment<4>(sx::kQ) = quat_mul(q, Quatd(0.0, w(0), w(1), w(2))) / 2.0;
  dx.segment<3>(sx::kV) = params.gravity + rotate(f_eff, q) / params.mass;
  dx.segment<3>(sx::kW) = params.inertia.inverse() * torque;
  dx.segment<6>(sx::kF) = u;
  return dx;
}

StateVecd dynamics_plant(const StateVecd& x, const Vec6d& u,
                         const VehicleParams& params, const PlantPerturbation& pert) {
  return dynamics_perturbed(x, u, perturbed(params, pert), pert.wrench_distortion);
}

}  // namespace l1mpc
