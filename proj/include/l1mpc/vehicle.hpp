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

#ifndef L1MPC_VEHICLE_HPP_
#define L1MPC_VEHICLE_HPP_

#include <cmath>
#include <string_view>

#include <Eigen/Dense>

#include "l1mpc/math.hpp"

namespace l1mpc {

inline constexpr int kStateDim = 19;
inline constexpr int kTangentDim = 18;
inline constexpr int kWrenchDim = 6;

template <class S>
using StateVec = Eigen::Matrix<S, kStateDim, 1>;
template <class S>
using TangentVec = Eigen::Matrix<S, kTangentDim, 1>;
using StateVecd = StateVec<double>;
using TangentVecd = TangentVec<double>;

// Offsets into the stored state [p, q, v, ω, f_a, τ_a].
namespace sx {
inline constexpr int kP = 0;
inline constexpr int kQ = 3;
inline constexpr int kV = 7;
inline constexpr int kW = 10;
inline constexpr int kF = 13;
inline constexpr int kT = 16;
}  // namespace sx

// Offsets into the tangent space [δp, δθ, δv, δω, δf, δτ].
namespace tx {
inline constexpr int kP = 0;
inline constexpr int kQ = 3;
inline constexpr int kV = 6;
inline constexpr int kW = 9;
inline constexpr int kF = 12;
inline constexpr int kT = 15;
}  // namespace tx

struct VehicleParams {
  double mass = 4.0;
  Mat3d inertia = Vec3d(0.08, 0.08, 0.14).asDiagonal();
  Vec3d com_offset = Vec3d::Zero();
  Vec3d gravity = Vec3d(0.0, 0.0, 9.81);
  double arm_length = 0.3;

  /// Throws std::invalid_argument when mass, inertia or com offset is not
  /// physical.
  void validate() const;
};

struct VehicleState {
  Vec3d p = Vec3d::Zero();
  Quatd q = quat_identity();
  Vec3d v = Vec3d::Zero();
  Vec3d w = Vec3d::Zero();
  Vec3d f = Vec3d::Zero();
  Vec3d tau = Vec3d::Zero();

  StateVecd to_vector() const;
  static VehicleState from_vector(const StateVecd& x);
};

/// Time derivative of the actuator wrench, the control input of the OCP.
struct WrenchRate {
  Vec3d df = Vec3d::Zero();
  Vec3d dtau = Vec3d::Zero();

  Vec6d to_vector() const {
    Vec6d u;
    u << df, dtau;
    return u;
  }
};

enum class Group { kA, kB, kC, kD };

std::string_view to_string(Group g);
/// Parses "A".."D" (case-insensitive); throws std::invalid_argument otherwise.
Group parse_group(std::string_view s);

struct PlantPerturbation {
  double mass_delta = 0.0;
  double inertia_scale = 1.0;
  Vec3d com_shift = Vec3d::Zero();
  bool wrench_distortion = false;
  bool allocation_mismatch = false;

  /// Mass/inertia/com deltas of the benchmark plants; the com shift direction
  /// is configurable, its default has norm sqrt(3) cm.
  static PlantPerturbation for_group(Group g,
                                     const Vec3d& com_shift = Vec3d::Constant(0.01));
};

/// Nominal parameters with the perturbation's deltas applied. Throws
/// std::invalid_argument when the result is not physical.
VehicleParams perturbed(const VehicleParams& nominal, const PlantPerturbation& pert);

// ---------------------------------------------------------------------------
// Dynamics. All of these are templates over the scalar type of the state;
// parameters stay double and are cast on use.

/// [v̇; ω̇] of the rigid body under a total body wrench (f, τ).
template <class DQ, class DW, class DF, class DT>
Vec6<typename DQ::Scalar> rigid_body_acceleration(
    const Eigen::MatrixBase<DQ>& q, const Eigen::MatrixBase<DW>& w,
    const Eigen::MatrixBase<DF>& f, const Eigen::MatrixBase<DT>& tau,
    const VehicleParams& params) {
  using S = typename DQ::Scalar;
  const Mat3<S> J = params.inertia.template cast<S>();
  const Mat3<S> J_inv = params.inertia.inverse().template cast<S>();
  const Vec3<S> d = params.com_offset.template cast<S>();
  const Vec3<S> ww = w;
  const Vec3<S> ff = f;
  const Vec3<S> tt = tau;
  Vec6<S> acc;
  acc.template head<3>() =
      params.gravity.template cast<S>() + rotate(ff, q) / S(params.mass);
  acc.template tail<3>() = J_inv * (tt - d.cross(ff) - ww.cross(J * ww));
  return acc;
}

/// State derivative of the extended OCP model. `disturbance` is an extra
/// body wrench added to (f_a, τ_a) before it acts on the body.
template <class DX, class DU>
StateVec<typename DX::Scalar> dynamics_nominal(
    const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DU>& u,
    const VehicleParams& params, const Vec6d& disturbance = Vec6d::Zero()) {
  using S = typename DX::Scalar;
  const Quat<S> q = x.template segment<4>(sx::kQ);
  const Vec3<S> w = x.template segment<3>(sx::kW);
  const Vec3<S> f = x.template segment<3>(sx::kF) +
                    disturbance.head<3>().template cast<S>();
  const Vec3<S> tau = x.template segment<3>(sx::kT) +
                      disturbance.tail<3>().template cast<S>();
  StateVec<S> dx;
  dx.template segment<3>(sx::kP) = x.template segment<3>(sx::kV);
  dx.template segment<4>(sx::kQ) =
      quat_mul(q, Quat<S>(S(0), w(0), w(1), w(2))) / S(2);
  dx.template segment<6>(sx::kV) = rigid_body_acceleration(q, w, f, tau, params);
  dx.template segment<6>(sx::kF) = u;
  return dx;
}

/// Dynamics of the simulated "true" vehicle. Parameters are perturbed, and
/// with wrench_distortion the actuator wrench is distorted as
/// 0.95(f + sin f) and 0.9(τ + sin τ) - 0.95 d×f (sin elementwise).
StateVecd dynamics_plant(const StateVecd& x, const Vec6d& u,
                         const VehicleParams& params,
                         const PlantPerturbation& pert);

/// Same as dynamics_plant with already-perturbed parameters.
StateVecd dynamics_perturbed(const StateVecd& x, const Vec6d& u,
                             const VehicleParams& perturbed_params,
                             bool wrench_distortion);

/// Classical RK4 step; renormalizes the attitude quaternion afterwards.
template <class S, class Deriv>
StateVec<S> rk4_step(const StateVec<S>& x, const Vec6<S>& u, double dt,
                     const Deriv& deriv) {
  const S h(dt);
  const StateVec<S> k1 = deriv(x, u);
  const StateVec<S> k2 = deriv(StateVec<S>(x + (h / S(2)) * k1), u);
  const StateVec<S> k3 = deriv(StateVec<S>(x + (h / S(2)) * k2), u);
  const StateVec<S> k4 = deriv(StateVec<S>(x + h * k3), u);
  StateVec<S> next = x + (h / S(6)) * (k1 + S(2) * k2 + S(2) * k3 + k4);
  next.template segment<4>(sx::kQ) =
      quat_normalized(next.template segment<4>(sx::kQ));
  return next;
}

// Tangent-space chart on the stored state (attitude via quat_box_plus).
template <class DX, class DT>
StateVec<typename DX::Scalar> state_box_plus(const Eigen::MatrixBase<DX>& x,
                                             const Eigen::MatrixBase<DT>& dx) {
  using S = typename DX::Scalar;
  StateVec<S> out;
  out.template segment<3>(sx::kP) = x.template segment<3>(sx::kP) + dx.template segment<3>(tx::kP);
  out.template segment<4>(sx::kQ) =
      quat_box_plus(x.template segment<4>(sx::kQ), dx.template segment<3>(tx::kQ));
  out.template segment<12>(sx::kV) = x.template segment<12>(sx::kV) + dx.template segment<12>(tx::kV);
  return out;
}

template <class DA, class DB>
TangentVec<typename DA::Scalar> state_box_minus(const Eigen::MatrixBase<DA>& a,
                                                const Eigen::MatrixBase<DB>& b) {
  using S = typename DA::Scalar;
  const StateVec<S> bb = b.template cast<S>();
  TangentVec<S> d;
  d.template segment<3>(tx::kP) = a.template segment<3>(sx::kP) - bb.template segment<3>(sx::kP);
  d.template segment<3>(tx::kQ) =
      quat_box_minus(Quat<S>(a.template segment<4>(sx::kQ)), Quat<S>(bb.template segment<4>(sx::kQ)));
  d.template segment<12>(tx::kV) = a.template segment<12>(sx::kV) - bb.template segment<12>(sx::kV);
  return d;
}

}  // namespace l1mpc

#endif  // L1MPC_VEHICLE_HPP_
