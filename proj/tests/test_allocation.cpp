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

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "l1mpc/allocation.hpp"
#include "test_util.hpp"

namespace l1mpc {
namespace {

class AllocationTest : public ::testing::Test {
 protected:
  ActuatorGeometry geom = ActuatorGeometry::hexacopter();
  AllocationMatrices mats = build_matrices(geom);
};

// Direct per-rotor formulas, independent of the library.
Vec6d rotor_oracle(int i, double omega, double tilt, const ActuatorGeometry& g) {
  const double gamma = g.azimuth[i];
  const Vec3d a(std::cos(gamma), std::sin(gamma), 0.0);
  // Rodrigues rotation of [0, 0, -1] about a by tilt.
  const Vec3d v(0, 0, -1);
  const Vec3d d = v * std::cos(tilt) + a.cross(v) * std::sin(tilt) +
                  a * a.dot(v) * (1 - std::cos(tilt));
  const Vec3d f = g.thrust_coeff * omega * omega * d;
  Vec6d w;
  w << f, (g.arm_length * a).cross(f) + g.spin[i] * g.drag_coeff * omega * omega * d;
  return w;
}

TEST_F(AllocationTest, EqualSpeedsZeroTiltCancelTorque) {
  ActuatorCommand cmd;
  cmd.omega.setConstant(800.0);
  const Vec6d w = command_wrench(cmd, mats);
  EXPECT_LT(w.tail<3>().norm(), 1e-12);
  EXPECT_LT((w.head<3>() - Vec3d(0, 0, -6 * geom.thrust_coeff * 800.0 * 800.0)).norm(), 1e-9);
}

TEST_F(AllocationTest, SingleRotorMatchesDirectFormula) {
  for (int i = 0; i < kNumRotors; ++i) {
    for (double tilt : {0.0, 0.4, -1.2, 2.5}) {
      ActuatorCommand cmd;
      cmd.omega(i) = 700.0;
      cmd.tilt(i) = tilt;
      const Vec6d expected = rotor_oracle(i, 700.0, tilt, geom);
      EXPECT_LT((command_wrench(cmd, mats) - expected).norm(), 1e-10);
      EXPECT_LT((rotor_wrench(i, 700.0, tilt, geom) - expected).norm(), 1e-10);
    }
  }
}

TEST_F(AllocationTest, MatrixMatchesRotorSumOnRandomCommands) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> om(0.0, 1300.0), al(-M_PI, M_PI);
  for (int k = 0; k < 1000; ++k) {
    ActuatorCommand cmd;
    Vec6d sum = Vec6d::Zero();
    for (int i = 0; i < kNumRotors; ++i) {
      cmd.omega(i) = om(rng);
      cmd.tilt(i) = al(rng);
      sum += rotor_oracle(i, cmd.omega(i), cmd.tilt(i), geom);
    }
    EXPECT_LT((command_wrench(cmd, mats) - sum).norm(), 1e-10);
  }
}

TEST_F(AllocationTest, FullRankAndPseudoInverseIdentity) {
  Eigen::JacobiSVD<Mat6x12d> svd(mats.effectiveness);
  EXPECT_GT(svd.singularValues()(5), 1e-6);
  EXPECT_LT((mats.effectiveness * mats.effectiveness_pinv - Mat6d::Identity()).norm(), 1e-9);
}

TEST_F(AllocationTest, HoverGivesEqualSpeedsAndNoTilt) {
  const Vec6d hover = (Vec6d() << 0, 0, -4.0 * 9.81, 0, 0, 0).finished();
  const ActuatorCommand cmd = allocate(hover, mats);
  // Least-squares oracle: six equal vertical thrusts of mg/6.
  const double expected = std::sqrt(4.0 * 9.81 / 6.0 / geom.thrust_coeff);
  for (int i = 0; i < kNumRotors; ++i) {
    EXPECT_NEAR(cmd.omega(i), expected, 1e-6);
    EXPECT_NEAR(cmd.tilt(i), 0.0, 1e-9);
  }
  EXPECT_FALSE(cmd.saturated);
}

TEST(RotorFromPair, FourthRootAndAtan2) {
  double omega = 0, tilt = 0;
  rotor_from_pair(3.0, 4.0, omega, tilt);
  EXPECT_NEAR(omega, std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(tilt, 0.6435011087932844, 1e-15);
  rotor_from_pair(0.0, 0.0, omega, tilt);
  EXPECT_EQ(omega, 0.0);
  EXPECT_EQ(tilt, 0.0);
}

TEST_F(AllocationTest, ZeroWrenchGivesZeroCommand) {
  for (const ActuatorCommand& cmd :
       {allocate(Vec6d::Zero(), mats), allocate_mismatched(Vec6d::Zero(), mats)}) {
    EXPECT_EQ(cmd.omega, Vec6d::Zero());
    EXPECT_EQ(cmd.tilt, Vec6d::Zero());
    EXPECT_FALSE(cmd.saturated);
  }
}

TEST_F(AllocationTest, MismatchSquaresSpeedAndKeepsTilt) {
  // Pair (3, 4) in Ω²-units: the correct extraction gives √5, the
  // mismatched one 5.
  const Eigen::Matrix<double, 2, 6> rows = mats.effectiveness_pinv.topRows<2>();
  const Eigen::Vector2d target = geom.thrust_coeff * Eigen::Vector2d(3.0, 4.0);
  const Vec6d w = rows.completeOrthogonalDecomposition().solve(target);
  ASSERT_LT((rows * w - target).norm(), 1e-15);
  const ActuatorCommand good = allocate(w, mats);
  const ActuatorCommand bad = allocate_mismatched(w, mats);
  EXPECT_NEAR(good.omega(0), std::sqrt(5.0), 1e-9);
  EXPECT_NEAR(bad.omega(0), 5.0, 1e-9);
  EXPECT_EQ(good.tilt, bad.tilt);

  std::mt19937_64 rng(32);
  for (int k = 0; k < 100; ++k) {
    const Vec6d wr = testing_util::random_vec6(rng, 0.01);
    const ActuatorCommand a = allocate(wr, mats);
    const ActuatorCommand b = allocate_mismatched(wr, mats);
    EXPECT_EQ(a.tilt, b.tilt);
    EXPECT_LT((b.omega - a.omega.cwiseAbs2()).norm(), 1e-9);
  }
}

TEST_F(AllocationTest, SaturationIsFlaggedAndClamped) {
  const Vec6d huge = (Vec6d() << 0, 0, -5000.0, 0, 0, 0).finished();
  const ActuatorCommand cmd = allocate(huge, mats);
  EXPECT_TRUE(cmd.saturated);
  EXPECT_LE(cmd.omega.maxCoeff(), geom.omega_max);
}

TEST_F(AllocationTest, RoundTripOnFeasibleWrenches) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> f(-30.0, 30.0), t(-3.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    Vec6d w;
    w << f(rng), f(rng), f(rng) - 40.0, t(rng), t(rng), t(rng);
    const ActuatorCommand cmd = allocate(w, mats);
    ASSERT_FALSE(cmd.saturated);
    Vec6d forward = Vec6d::Zero();
    for (int i = 0; i < kNumRotors; ++i) {
      forward += rotor_wrench(i, cmd.omega(i), cmd.tilt(i), geom);
    }
    EXPECT_LT((forward - w).norm(), 1e-6 * w.norm());
  }
}

TEST_F(AllocationTest, ThrustVectorZeroAndHover) {
  EXPECT_EQ(rotor_thrust_vector(Vec6d::Zero(), mats), Vec6d::Zero());
  const Vec6d hover = (Vec6d() << 0, 0, -4.0 * 9.81, 0, 0, 0).finished();
  const Vec6d F = rotor_thrust_vector(hover, mats);
  for (int j = 1; j < kNumRotors; ++j) EXPECT_NEAR(F(j), F(0), 1e-9);
  // Squared per-rotor thrust.
  EXPECT_NEAR(F(0), std::pow(4.0 * 9.81 / 6.0, 2), 1e-9);
}

TEST_F(AllocationTest, ThrustVectorIsQuadraticInWrench) {
  std::mt19937_64 rng(34);
  for (int k = 0; k < 200; ++k) {
    const Vec6d w = testing_util::random_vec6(rng, 20.0);
    for (double c : {0.5, 2.0, 3.7}) {
      const Vec6d a = rotor_thrust_vector(Vec6d(c * w), mats);
      const Vec6d b = c * c * rotor_thrust_vector(w, mats);
      EXPECT_LT((a - b).norm(), 1e-9 * (1.0 + b.norm()));
    }
  }
}

TEST_F(AllocationTest, ThrustVectorMirrorSymmetry) {
  // Mirroring rotor i to (6 - i) mod 6 (reflection across the body XZ
  // plane, spin pattern preserved) matches the wrench with y-force, z-force,
  // pitch and yaw torque negated.
  const Vec6d flip = (Vec6d() << 1, -1, -1, 1, -1, -1).finished();
  std::mt19937_64 rng(35);
  for (int k = 0; k < 200; ++k) {
    const Vec6d w = testing_util::random_vec6(rng, 20.0);
    const Vec6d F = rotor_thrust_vector(w, mats);
    const Vec6d G = rotor_thrust_vector(Vec6d(flip.cwiseProduct(w)), mats);
    for (int i = 0; i < kNumRotors; ++i) {
      EXPECT_NEAR(F(i), G((kNumRotors - i) % kNumRotors), 1e-9 * (1.0 + F.norm()));
    }
  }
}

TEST_F(AllocationTest, RebuildAfterGeometryChange) {
  ActuatorGeometry g2 = geom;
  g2.arm_length = 0.35;
  const AllocationMatrices m2 = build_matrices(g2);
  EXPECT_GT((m2.effectiveness - mats.effectiveness).norm(), 1e-3);
  EXPECT_GT((m2.effectiveness_pinv - mats.effectiveness_pinv).norm(), 1e-3);
  EXPECT_EQ(build_matrices(geom).effectiveness_pinv, mats.effectiveness_pinv);
}

TEST(ActuatorGeometry, RejectsDegenerateOrInvalid) {
  ActuatorGeometry g = ActuatorGeometry::hexacopter();
  for (auto& a : g.azimuth) a = 0.0;
  EXPECT_THROW(build_matrices(g), std::invalid_argument);
  g = ActuatorGeometry::hexacopter();
  g.thrust_coeff = 0.0;
  EXPECT_THROW(build_matrices(g), std::invalid_argument);
  g = ActuatorGeometry::hexacopter();
  g.spin[2] = 0;
  EXPECT_THROW(build_matrices(g), std::invalid_argument);
}

}  // namespace
}  // namespace l1mpc
