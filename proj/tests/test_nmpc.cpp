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

#include "l1mpc/nmpc.hpp"
#include "test_util.hpp"

namespace l1mpc {
namespace {

constexpr double kG = 9.81;

StateVecd hover(const VehicleParams& p, const Vec3d& pos = Vec3d(0, 0, -2)) {
  VehicleState s;
  s.p = pos;
  s.f = Vec3d(0, 0, -p.mass * kG);
  return s.to_vector();
}

ReferenceWindow constant_window(const ReferencePoint& r, int stages) {
  return ReferenceWindow(stages + 1, r);
}

class NmpcTest : public ::testing::Test {
 protected:
  VehicleParams params;
  AllocationMatrices mats = build_matrices(ActuatorGeometry::hexacopter());
  OcpWeights weights = OcpWeights::defaults();
  ConstraintSet constraints;
  SolverConfig cfg;
};

TEST(StageError, ZeroOnReferenceWithoutWrench) {
  ReferencePoint r;
  r.p = Vec3d(1, 2, 3);
  VehicleState s;
  s.p = r.p;
  EXPECT_EQ(stage_error(s.to_vector(), r), Vec18d::Zero());
}

TEST(StageError, WrenchBlockPassesThrough) {
  const VehicleParams p;
  const Vec18d e = stage_error(hover(p, Vec3d::Zero()), ReferencePoint{});
  Vec18d expected = Vec18d::Zero();
  expected(14) = -p.mass * kG;
  EXPECT_EQ(e, expected);
}

TEST(StageError, PositionErrorIsReferenceMinusState) {
  ReferencePoint r;
  VehicleState s;
  s.p = Vec3d(-1, 0, 0);
  const Vec18d e = stage_error(s.to_vector(), r);
  EXPECT_EQ(e(0), 1.0);
  EXPECT_EQ(e.tail<17>(), (Eigen::Matrix<double, 17, 1>::Zero()));
}

TEST_F(NmpcTest, HoverIsStationary) {
  weights.stage.tail<6>().setZero();
  weights.terminal.tail<6>().setZero();
  const StateVecd x0 = hover(params);
  ReferencePoint r;
  r.p = x0.segment<3>(sx::kP);
  const OcpResult res =
      solve_ocp(x0, constant_window(r, cfg.stages), weights, constraints, cfg, params, mats);
  EXPECT_EQ(res.diag.status, SolveStatus::kOk);
  EXPECT_LT(res.u0.to_vector().norm(), 1e-6);
}

TEST_F(NmpcTest, StepInXCommandsPositiveXForceRate) {
  const StateVecd x0 = hover(params);
  ReferencePoint r;
  r.p = x0.segment<3>(sx::kP) + Vec3d(1, 0, 0);
  const OcpResult res =
      solve_ocp(x0, constant_window(r, cfg.stages), weights, constraints, cfg, params, mats);
  EXPECT_GT(res.u0.df(0), 0.0);
  EXPECT_GT(res.u0.df(0), 10.0 * std::abs(res.u0.df(1)));
}

TEST_F(NmpcTest, FirstControlWithinBoundsOnLargeStep) {
  const StateVecd x0 = hover(params);
  ReferencePoint r;
  r.p = x0.segment<3>(sx::kP) + Vec3d(3, -3, 1);
  r.q = quat_from_euler(1.0, -1.0, 2.0);
  constraints.u_lb = Vec6d::Constant(-2.0);
  constraints.u_ub = Vec6d::Constant(2.0);
  cfg.max_iterations = 10;
  const OcpResult res =
      solve_ocp(x0, constant_window(r, cfg.stages), weights, constraints, cfg, params, mats);
  const Vec6d u0 = res.u0.to_vector();
  EXPECT_TRUE((u0.array() <= constraints.u_ub.array()).all());
  EXPECT_TRUE((u0.array() >= constraints.u_lb.array()).all());
  EXPECT_EQ(u0.cwiseAbs().maxCoeff(), 2.0);
}

TEST_F(NmpcTest, MeritNeverIncreases) {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 10; ++k) {
    NmpcSolver solver(params, mats, weights, constraints, cfg);
    StateVecd x0 = hover(params);
    x0.segment<3>(sx::kV) = testing_util::random_vec3(rng, 1.0);
    x0.segment<3>(sx::kW) = testing_util::random_vec3(rng, 0.5);
    ReferencePoint r;
    r.p = testing_util::random_vec3(rng, 1.0);
    r.q = quat_from_euler(0.3, -0.2, 0.5);
    solver.solve(x0, constant_window(r, cfg.stages));
    for (int it = 0; it < 10; ++it) {
      const SqpReport rep = solver.sqp().solve(solver.model(), x0);
      EXPECT_LE(rep.merit_final, rep.merit_initial);
    }
  }
}

TEST_F(NmpcTest, DeterministicBitForBit) {
  const StateVecd x0 = hover(params);
  ReferencePoint r;
  r.p = Vec3d(0.5, -0.3, -2.2);
  r.q = quat_from_euler(0.2, 0.1, -0.3);
  const ReferenceWindow refs = constant_window(r, cfg.stages);
  NmpcSolver a(params, mats, weights, constraints, cfg);
  NmpcSolver b(params, mats, weights, constraints, cfg);
  for (int k = 0; k < 3; ++k) {
    const OcpResult ra = a.solve(x0, refs);
    const OcpResult rb = b.solve(x0, refs);
    EXPECT_EQ(ra.u0.to_vector(), rb.u0.to_vector());
    EXPECT_EQ(ra.diag.kkt, rb.diag.kkt);
  }
}

TEST_F(NmpcTest, VelocityViolationIsReported) {
  StateVecd x0 = hover(params);
  x0.segment<3>(sx::kV) = Vec3d(9.0, 0, 0);
  ReferencePoint r;
  r.p = x0.segment<3>(sx::kP);
  const OcpResult res =
      solve_ocp(x0, constant_window(r, cfg.stages), weights, constraints, cfg, params, mats);
  EXPECT_GT(res.diag.constraint_violation, 0.0);
  EXPECT_EQ(res.diag.status, SolveStatus::kOk);
}

TEST_F(NmpcTest, ZeroDisturbanceReducesToNominal) {
  const StateVecd x0 = hover(params);
  ReferencePoint r;
  r.p = Vec3d(0.2, 0.1, -2.1);
  const ReferenceWindow refs = constant_window(r, cfg.stages);
  const OcpResult a = solve_ocp(x0, refs, weights, constraints, cfg, params, mats);
  const OcpResult b = solve_ocp_ekf(x0, refs, Vec3d::Zero(), Vec3d::Zero(), weights,
                                    constraints, cfg, params, mats);
  EXPECT_EQ(a.u0.to_vector(), b.u0.to_vector());
}

TEST_F(NmpcTest, DisturbanceShiftsStationaryWrench) {
  // With a +5 N body-Z disturbance the stationary actuator force is
  // hover - 5 N; the nominal hover force is no longer stationary.
  weights.stage.tail<6>().setZero();
  weights.terminal.tail<6>().setZero();
  StateVecd x0 = hover(params);
  x0(sx::kF + 2) -= 5.0;
  ReferencePoint r;
  r.p = x0.segment<3>(sx::kP);
  const ReferenceWindow refs = constant_window(r, cfg.stages);
  const OcpResult with_d = solve_ocp_ekf(x0, refs, Vec3d(0, 0, 5.0), Vec3d::Zero(), weights,
                                         constraints, cfg, params, mats);
  EXPECT_LT(with_d.u0.to_vector().norm(), 1e-6);
  const OcpResult without =
      solve_ocp(x0, refs, weights, constraints, cfg, params, mats);
  EXPECT_GT(without.u0.df(2), 1.0);
}

TEST(WarmStart, ShiftOfConstantIsIdentity) {
  OcpTrajectory t = cold_start(StateVecd::Ones(), 5);
  for (auto& u : t.controls) u = Vec6d::Constant(2.0);
  const OcpTrajectory s = shift_warm_start(t);
  EXPECT_EQ(s.states, t.states);
  EXPECT_EQ(s.controls, t.controls);
}

TEST(WarmStart, ShiftDuplicatesTail) {
  OcpTrajectory t = cold_start(StateVecd::Zero(), 2);
  t.controls[0] = Vec6d::Constant(1.0);
  t.controls[1] = Vec6d::Constant(2.0);
  for (int k = 0; k < 3; ++k) t.states[k] = StateVecd::Constant(k);
  const OcpTrajectory s = shift_warm_start(t);
  EXPECT_EQ(s.controls[0], Vec6d::Constant(2.0));
  EXPECT_EQ(s.controls[1], Vec6d::Constant(2.0));
  EXPECT_EQ(s.states[0], StateVecd::Constant(1));
  EXPECT_EQ(s.states[2], StateVecd::Constant(2));
}

TEST(WarmStart, ColdStartReplicatesState) {
  std::mt19937_64 rng(52);
  const StateVecd x0 = testing_util::random_state(rng);
  const OcpTrajectory t = cold_start(x0, 20);
  ASSERT_EQ(t.states.size(), 21u);
  ASSERT_EQ(t.controls.size(), 20u);
  for (const auto& x : t.states) EXPECT_EQ(x, x0);
  for (const auto& u : t.controls) EXPECT_EQ(u, Vec6d::Zero());
}

TEST_F(NmpcTest, ConfigurationIsValidated) {
  SolverConfig bad = cfg;
  bad.stages = 1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.horizon = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  ConstraintSet c;
  c.v_lb(0) = 10.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  OcpWeights w = OcpWeights::defaults();
  w.control(2) = -1.0;
  EXPECT_THROW(w.validate(), std::invalid_argument);
  NmpcSolver solver(params, mats, weights, constraints, cfg);
  EXPECT_THROW(solver.solve(hover(params), ReferenceWindow(3)), std::invalid_argument);
}

TEST(OcpWeights, DefaultsMatchDocumentedValues) {
  const OcpWeights w = OcpWeights::defaults();
  EXPECT_EQ(w.stage(0), 40.0);
  EXPECT_EQ(w.stage(3), 40.0);
  EXPECT_EQ(w.stage(6), 4.0);
  EXPECT_EQ(w.stage(9), 4.0);
  EXPECT_EQ(w.stage(12), 1e-3);
  EXPECT_EQ(w.control(0), 1e-4);
  EXPECT_EQ(w.terminal(0), 400.0);
}

}  // namespace
}  // namespace l1mpc
