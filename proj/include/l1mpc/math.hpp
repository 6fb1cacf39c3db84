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

#ifndef L1MPC_MATH_HPP_
#define L1MPC_MATH_HPP_

#include <cmath>

#include <Eigen/Dense>

// Quaternion and small fixed-size helpers. Quaternions are plain 4-vectors in
// scalar-first order [w, x, y, z] so they can live inside larger state
// vectors and be passed around as Eigen segments. Everything is templated on
// the scalar so the same code runs with double and with AutoDiffScalar.
namespace l1mpc {

template <class S>
using Vec3 = Eigen::Matrix<S, 3, 1>;
template <class S>
using Vec6 = Eigen::Matrix<S, 6, 1>;
template <class S>
using Mat3 = Eigen::Matrix<S, 3, 3>;
template <class S>
using Mat6 = Eigen::Matrix<S, 6, 6>;
template <class S>
using Quat = Eigen::Matrix<S, 4, 1>;

using Vec3d = Vec3<double>;
using Vec6d = Vec6<double>;
using Mat3d = Mat3<double>;
using Mat6d = Mat6<double>;
using Quatd = Quat<double>;

template <class Derived>
using PlainOf = typename Derived::PlainObject;

template <class S = double>
Quat<S> quat_identity() {
  return Quat<S>(S(1), S(0), S(0), S(0));
}

template <class S>
Quat<S> quat_from_vector_part(S w, const Vec3<S>& xyz) {
  return Quat<S>(w, xyz(0), xyz(1), xyz(2));
}

/// Hamilton product a ⊗ b.
template <class DA, class DB>
Quat<typename DA::Scalar> quat_mul(const Eigen::MatrixBase<DA>& a,
                                   const Eigen::MatrixBase<DB>& b) {
  using S = typename DA::Scalar;
  const S aw = a(0), ax = a(1), ay = a(2), az = a(3);
  const S bw = b(0), bx = b(1), by = b(2), bz = b(3);
  return Quat<S>(aw * bw - ax * bx - ay * by - az * bz,
                 aw * bx + ax * bw + ay * bz - az * by,
                 aw * by - ax * bz + ay * bw + az * bx,
                 aw * bz + ax * by - ay * bx + az * bw);
}

template <class D>
Quat<typename D::Scalar> quat_conjugate(const Eigen::MatrixBase<D>& q) {
  return Quat<typename D::Scalar>(q(0), -q(1), -q(2), -q(3));
}

/// General inverse; equals the conjugate for unit quaternions.
template <class D>
Quat<typename D::Scalar> quat_inverse(const Eigen::MatrixBase<D>& q) {
  return quat_conjugate(q) / q.squaredNorm();
}

template <class D>
Quat<typename D::Scalar> quat_normalized(const Eigen::MatrixBase<D>& q) {
  using std::sqrt;
  return q / sqrt(q.squaredNorm());
}

/// Flip sign so that w >= 0. Same rotation, unique representative.
template <class D>
Quat<typename D::Scalar> quat_canonical(const Eigen::MatrixBase<D>& q) {
  using S = typename D::Scalar;
  return q(0) < S(0) ? Quat<S>(-q) : Quat<S>(q);
}

/// v × u as a matrix product: skew(v) * u.
template <class D>
Mat3<typename D::Scalar> skew(const Eigen::MatrixBase<D>& v) {
  using S = typename D::Scalar;
  Mat3<S> m;
  m << S(0), -v(2), v(1),
       v(2), S(0), -v(0),
       -v(1), v(0), S(0);
  return m;
}

/// Vector part of q ⊗ [0, v] ⊗ q⁻¹ for unit q (body to world for attitudes).
template <class DV, class DQ>
Vec3<typename DV::Scalar> rotate(const Eigen::MatrixBase<DV>& v,
                                 const Eigen::MatrixBase<DQ>& q) {
  using S = typename DV::Scalar;
  const Vec3<S> u(q(1), q(2), q(3));
  const Vec3<S> vv = v;
  const Vec3<S> t = S(2) * u.cross(vv);
  return vv + q(0) * t + u.cross(t);
}

/// Body-to-world rotation matrix of a unit quaternion.
template <class D>
Mat3<typename D::Scalar> rotation_matrix(const Eigen::MatrixBase<D>& q) {
  using S = typename D::Scalar;
  const S w = q(0), x = q(1), y = q(2), z = q(3);
  Mat3<S> r;
  r << S(1) - S(2) * (y * y + z * z), S(2) * (x * y - w * z), S(2) * (x * z + w * y),
       S(2) * (x * y + w * z), S(1) - S(2) * (x * x + z * z), S(2) * (y * z - w * x),
       S(2) * (x * z - w * y), S(2) * (y * z + w * x), S(1) - S(2) * (x * x + y * y);
  return r;
}

/// Vector part of q ⊗ q_ref⁻¹, canonicalized to w >= 0 so that q and -q give
/// the same error.
template <class DQ, class DR>
Vec3<typename DQ::Scalar> quat_error(const Eigen::MatrixBase<DQ>& q,
                                     const Eigen::MatrixBase<DR>& q_ref) {
  const auto e = quat_canonical(quat_mul(q, quat_conjugate(q_ref)));
  return e.template tail<3>();
}

/// Rotation of `angle` about unit `axis`.
template <class S>
Quat<S> quat_from_axis_angle(const Vec3<S>& axis, S angle) {
  using std::cos;
  using std::sin;
  const S h = angle / S(2);
  return quat_from_vector_part<S>(cos(h), sin(h) * axis);
}

/// Intrinsic Z-Y-X (yaw, pitch, roll) Euler angles to quaternion.
template <class S>
Quat<S> quat_from_euler(S roll, S pitch, S yaw) {
  using std::cos;
  using std::sin;
  const S cr = cos(roll / S(2)), sr = sin(roll / S(2));
  const S cp = cos(pitch / S(2)), sp = sin(pitch / S(2));
  const S cy = cos(yaw / S(2)), sy = sin(yaw / S(2));
  return Quat<S>(cr * cp * cy + sr * sp * sy,
                 sr * cp * cy - cr * sp * sy,
                 cr * sp * cy + sr * cp * sy,
                 cr * cp * sy - sr * sp * cy);
}

// Local chart on the unit sphere used for tangent-space perturbations of
// attitudes. box_plus and box_minus are exact inverses of each other for
// rotations below 180 degrees.
template <class DQ, class DT>
Quat<typename DQ::Scalar> quat_box_plus(const Eigen::MatrixBase<DQ>& q,
                                        const Eigen::MatrixBase<DT>& dtheta) {
  using S = typename DQ::Scalar;
  const Quat<S> dq(S(1), dtheta(0) / S(2), dtheta(1) / S(2), dtheta(2) / S(2));
  return quat_normalized(quat_mul(q, dq));
}

template <class DA, class DB>
Vec3<typename DA::Scalar> quat_box_minus(const Eigen::MatrixBase<DA>& qa,
                                         const Eigen::MatrixBase<DB>& qb) {
  using S = typename DA::Scalar;
  const Quat<S> e = quat_canonical(quat_mul(quat_conjugate(qb), qa));
  return S(2) * e.template tail<3>() / e(0);
}

}  // namespace l1mpc

#endif  // L1MPC_MATH_HPP_
