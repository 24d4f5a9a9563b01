#include "cotrans/controller.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cotrans/simulation.h"
#include "test_util.h"

namespace cotrans {
namespace {

using testing::random_vector;
using testing::vec2;

constexpr double kPi = std::numbers::pi;

ControllerGains reference_gains() {
  ControllerGains g;
  g.k_v = 0.5;
  g.k_p = 1.0;
  g.eps = 0.01;
  g.dirs = DirectionSet::EvenlySpaced(3);
  return g;
}

const BodyGeometry kGeom{0.2, 0.6, 30.0};

TEST(CommandSignal, CircularAtStart) {
  const CommandSignal c = CommandSignal::Circular(2, 1.0, 20.0);
  const CommandSignal::Sample s = c(0.0);
  EXPECT_LT((s.velocity - vec2(-1, 0)).norm(), 1e-15);
  EXPECT_LT((s.acceleration - vec2(0, -kPi / 10)).norm(), 1e-15);
  EXPECT_LT((s.jerk - vec2(kPi * kPi / 100, 0)).norm(), 1e-15);
}

TEST(CommandSignal, CircularHalfPeriod) {
  const CommandSignal c = CommandSignal::Circular(2, 1.0, 20.0);
  EXPECT_LT((c(10.0).velocity - vec2(1, 0)).norm(), 1e-15);
}

TEST(CommandSignal, DerivativesMatchFiniteDifferences) {
  const CommandSignal c = CommandSignal::Circular(2, 1.7, 13.0);
  const double h = 1e-5;
  for (double t : {0.3, 4.0, 11.1}) {
    const Vec fd_a = (c(t + h).velocity - c(t - h).velocity) / (2 * h);
    const Vec fd_j = (c(t + h).acceleration - c(t - h).acceleration) / (2 * h);
    EXPECT_LT((fd_a - c(t).acceleration).norm(), 1e-8);
    EXPECT_LT((fd_j - c(t).jerk).norm(), 1e-8);
  }
}

TEST(CommandSignal, ConstantAndZero) {
  const CommandSignal c = CommandSignal::Constant(vec2(0.5, 0));
  for (double t : {0.0, 1.0, 100.0}) {
    EXPECT_EQ(c(t).velocity, vec2(0.5, 0));
    EXPECT_EQ(c(t).acceleration, vec2(0, 0));
    EXPECT_EQ(c(t).jerk, vec2(0, 0));
  }
  EXPECT_EQ(CommandSignal::Zero(3)(2.0).velocity, Vec::Zero(3));
}

TEST(CommandSignal, Scaled) {
  const CommandSignal c = CommandSignal::Circular(2, 1.0, 20.0).Scaled(0.25);
  EXPECT_LT((c(0.0).velocity - vec2(-0.25, 0)).norm(), 1e-15);
  EXPECT_LT((c(0.0).acceleration - vec2(0, -0.25 * kPi / 10)).norm(), 1e-15);
}

TEST(VirtualPositions, MatchedVelocityTouches) {
  const ControllerGains g = reference_gains();
  const Vec p_o = vec2(1, -2);
  const VirtualPositions vp = virtual_positions(g, kGeom, p_o, vec2(0.3, 0.1), vec2(0.3, 0.1),
                                                vec2(0, 0));
  EXPECT_EQ(vp.s_star, Vec::Zero(3));
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((vp.p_star.col(i) - (p_o + 0.8 * g.dirs.direction(i))).norm(), 1e-15);
  }
  EXPECT_EQ(vp.qp_residual, 0.0);
  EXPECT_FALSE(vp.saturated);
}

TEST(VirtualPositions, DecelerationUsesOnlyFirstDirection) {
  const ControllerGains g = reference_gains();
  const VirtualPositions vp =
      virtual_positions(g, kGeom, vec2(0, 0), vec2(0.2, 0), vec2(0, 0), vec2(0, 0));
  const QpSolution oracle = solve_qp_oracle(
      assemble_qp(g.dirs, 30.0, 0.01, 0.5, vec2(0.2, 0), vec2(0, 0)));
  EXPECT_GT(vp.s_star(0), 0.0);
  EXPECT_EQ(vp.s_star(1), 0.0);
  EXPECT_EQ(vp.s_star(2), 0.0);
  EXPECT_LT((vp.s_star - oracle.s).norm(), 1e-12);
  // One free variable: s_1 = 6 / 1800.02.
  EXPECT_NEAR(vp.s_star(0), 6.0 / 1800.02, 1e-15);
}

TEST(VirtualPositions, PlacedAlongDirections) {
  std::mt19937_64 rng(7);
  const ControllerGains g = reference_gains();
  for (int k = 0; k < 200; ++k) {
    const Vec p_o = random_vector(rng, 2, 5.0);
    const VirtualPositions vp = virtual_positions(g, kGeom, p_o, random_vector(rng, 2, 2.0),
                                                  random_vector(rng, 2, 2.0),
                                                  random_vector(rng, 2, 2.0));
    EXPECT_GE(vp.s_star.minCoeff(), -1e-12);
    for (int i = 0; i < 3; ++i) {
      const Vec expected = p_o + g.dirs.direction(i) * (0.8 - vp.s_star(i));
      EXPECT_EQ(vp.p_star.col(i), expected);
    }
  }
}

TEST(VirtualPositions, ResidualBound) {
  std::mt19937_64 rng(8);
  const ControllerGains g = reference_gains();
  for (int k = 0; k < 1000; ++k) {
    const Vec v_o = random_vector(rng, 2, 2.0);
    const Vec v_c = random_vector(rng, 2, 2.0);
    const Vec a = random_vector(rng, 2, 2.0);
    const VirtualPositions vp = virtual_positions(g, kGeom, vec2(0, 0), v_o, v_c, a);
    const Vec u = g.k_v * (v_o - v_c) - a;
    EXPECT_NEAR(vp.u_norm, u.norm(), 1e-14);
    const PositiveCombination pc = positive_combination_basis(g.dirs, u / 30.0);
    const double bound = std::sqrt(g.eps) * pc.basis.inverse().operatorNorm() * u.norm() / 30.0;
    EXPECT_LE(vp.qp_residual, bound);
  }
}

TEST(VirtualPositions, SolutionMapLipschitz) {
  std::mt19937_64 rng(9);
  const ControllerGains g = reference_gains();
  const double l_phi = estimate_solution_lipschitz(g.dirs, 30.0, g.eps, g.k_v);
  auto s_of = [&](const Vec& e, const Vec& a) {
    return virtual_positions(g, kGeom, vec2(0, 0), e, vec2(0, 0), a).s_star;
  };
  for (int k = 0; k < 1000; ++k) {
    const Vec e1 = random_vector(rng, 2, 2.0), a1 = random_vector(rng, 2, 2.0);
    const Vec e2 = random_vector(rng, 2, 2.0), a2 = random_vector(rng, 2, 2.0);
    const double d_in = std::sqrt((e1 - e2).squaredNorm() + (a1 - a2).squaredNorm());
    EXPECT_LE((s_of(e1, a1) - s_of(e2, a2)).norm(), l_phi * d_in * (1 + 1e-9));
  }
}

TEST(VirtualPositions, LargerRegularizerShrinksSolution) {
  std::mt19937_64 rng(10);
  for (int k = 0; k < 200; ++k) {
    const Vec e = random_vector(rng, 2, 2.0), a = random_vector(rng, 2, 2.0);
    double previous = std::numeric_limits<double>::infinity();
    for (double eps : {1e-4, 1e-2, 1.0, 10.0, 1e3, 1e5}) {
      ControllerGains g = reference_gains();
      g.eps = eps;
      const double sq = virtual_positions(g, kGeom, vec2(0, 0), e, vec2(0, 0), a).s_star.squaredNorm();
      EXPECT_LE(sq, previous * (1 + 1e-12));
      previous = sq;
    }
  }
}

TEST(VirtualPositions, FlagsSaturation) {
  const ControllerGains g = reference_gains();
  const VirtualPositions big =
      virtual_positions(g, kGeom, vec2(0, 0), vec2(100, 0), vec2(0, 0), vec2(0, 0));
  EXPECT_GE(big.s_star.maxCoeff(), 0.8);
  EXPECT_TRUE(big.saturated);
  EXPECT_FALSE(virtual_positions(g, kGeom, vec2(0, 0), vec2(1, 0), vec2(0, 0), vec2(0, 0)).saturated);
}

TEST(RobotVelocityCommands, Examples) {
  ControllerGains g = reference_gains();
  SystemState s{vec2(0, 0), vec2(0.4, -0.2), Eigen::MatrixXd::Random(2, 3)};
  Eigen::MatrixXd v = robot_velocity_commands(g, s, s.robots);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(v.col(i), s.v_o);

  s.v_o = vec2(0, 0);
  Eigen::MatrixXd p_star = s.robots;
  p_star.col(0) -= vec2(0.1, 0);
  v = robot_velocity_commands(g, s, p_star);
  EXPECT_LT((v.col(0) - vec2(-0.1, 0)).norm(), 1e-15);

  s.v_o = vec2(0.3, 0.7);
  p_star = Eigen::MatrixXd::Random(2, 3);
  const Eigen::MatrixXd base = robot_velocity_commands(g, s, p_star).colwise() - s.v_o;
  g.k_p = 2.0;
  const Eigen::MatrixXd doubled = robot_velocity_commands(g, s, p_star).colwise() - s.v_o;
  EXPECT_LT((doubled - 2.0 * base).norm(), 1e-14);
}

TEST(ControlStep, Equilibrium) {
  const ControllerGains g = reference_gains();
  const Vec v_c = vec2(0.5, 0.25);
  SystemState s{vec2(3, 1), v_c, Eigen::MatrixXd(2, 3)};
  for (int i = 0; i < 3; ++i) s.robots.col(i) = s.p_o + 0.8 * g.dirs.direction(i);
  const ControlOutput out = control_step(g, kGeom, CommandSignal::Constant(v_c), s, 4.0);
  EXPECT_EQ(out.s_star, Vec::Zero(3));
  for (int i = 0; i < 3; ++i) EXPECT_LT((out.robot_velocities.col(i) - v_c).norm(), 1e-15);
}

// Values cross-checked against an independent NNLS solve of the same QP.
TEST(ControlStep, InitialStateOfReferenceScenario) {
  const ScenarioConfig cfg = reference_scenario(1.0);
  const ControlOutput out =
      control_step(cfg.gains, cfg.geom, cfg.command, cfg.initial_state, 0.0);
  EXPECT_NEAR(out.s_star(0), 0.022712238502074121, 1e-12);
  EXPECT_NEAR(out.s_star(1), 0.012091648387226067, 1e-12);
  EXPECT_EQ(out.s_star(2), 0.0);
  Eigen::MatrixXd expected(2, 3);
  expected << -0.22271223850207456, 0.60604582419361286, 0.6,
              -1.0, -0.31765135164941594, 0.3071796769724493;
  EXPECT_LT((out.robot_velocities - expected).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_FALSE(out.saturated);
  const QpSolution oracle = solve_qp_oracle(assemble_qp(
      cfg.gains.dirs, 30.0, 0.01, 0.5, cfg.initial_state.v_o - vec2(-1, 0), vec2(0, -kPi / 10)));
  EXPECT_LT((out.s_star - oracle.s).norm(), 1e-12);
}

TEST(ControlStep, PermutationSymmetry) {
  std::mt19937_64 rng(12);
  const ScenarioConfig cfg = reference_scenario(1.0);
  const std::vector<int> order = {2, 0, 1};
  ControllerGains permuted = cfg.gains;
  permuted.dirs = cfg.gains.dirs.Permuted(order);
  for (int k = 0; k < 100; ++k) {
    SystemState s{random_vector(rng, 2, 3.0), random_vector(rng, 2, 1.0), Eigen::MatrixXd(2, 3)};
    for (int i = 0; i < 3; ++i) s.robots.col(i) = s.p_o + random_vector(rng, 2, 1.0);
    SystemState sp = s;
    for (int i = 0; i < 3; ++i) sp.robots.col(i) = s.robots.col(order[i]);
    const double t = 0.37 * k;
    const ControlOutput a = control_step(cfg.gains, cfg.geom, cfg.command, s, t);
    const ControlOutput b = control_step(permuted, cfg.geom, cfg.command, sp, t);
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(b.s_star(i), a.s_star(order[i]), 1e-12);
      EXPECT_LT((b.robot_velocities.col(i) - a.robot_velocities.col(order[i])).norm(), 1e-12);
    }
  }
}

}  // namespace
}  // namespace cotrans
