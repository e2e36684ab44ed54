#include "pgraph/grad.hpp"
#include "pgraph/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pgraph;

namespace {

const SolverOptions kTight{.tolerance = 1e-12};

/// Central difference of the dense oracle along one raw table entry. Rows are
/// not renormalised: the criterion is differentiated as a function of every
/// entry independently.
Scalar finite_difference(const Pomdp& m, const PolicyGraph& g, Matrix PolicyGraph::*table, Index r, Index c) {
  const Scalar h = 1e-6;
  PolicyGraph plus = g, minus = g;
  (plus.*table)(r, c) += h;
  (minus.*table)(r, c) -= h;
  return (test::oracle_criterion(m, plus) - test::oracle_criterion(m, minus)) / (2 * h);
}

void expect_close(Scalar got, Scalar want, Scalar rel, Scalar abs_floor) {
  EXPECT_LE(std::abs(got - want), std::max(rel * std::abs(want), abs_floor)) << got << " vs " << want;
}

}  // namespace

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    const Pomdp m = test::random_pomdp(rng, 2 + i % 4, 2, 1 + i % 3, 0.9);
    const Index N = 1 + i % 3;
    const PolicyGraph g = test::random_graph(rng, N, m.num_observations(), m.num_actions());
    const auto grad = gradient_matrix(m, g, nullptr, InverseMethod::Direct);
    for (Index r = 0; r < g.action_dist.rows(); ++r)
      for (Index c = 0; c < g.action_dist.cols(); ++c)
        expect_close(grad.d_psi(r, c), finite_difference(m, g, &PolicyGraph::action_dist, r, c), 1e-5, 1e-7);
    for (Index r = 0; r < g.node_trans.rows(); ++r)
      for (Index c = 0; c < g.node_trans.cols(); ++c)
        expect_close(grad.d_eta(r, c), finite_difference(m, g, &PolicyGraph::node_trans, r, c), 1e-5, 1e-7);
    for (Index r = 0; r < g.initial_dist.rows(); ++r)
      for (Index c = 0; c < g.initial_dist.cols(); ++c)
        expect_close(grad.d_eta0(r, c), finite_difference(m, g, &PolicyGraph::initial_dist, r, c), 1e-5, 1e-7);
  }
}

TEST(Gradient, MethodsAgree) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 10; ++i) {
    const Pomdp m = test::random_pomdp(rng, 3 + i % 4, 3, 2, 0.95);
    const PolicyGraph g = test::random_graph(rng, 3, 2, 3);
    const auto direct = gradient_matrix(m, g, nullptr, InverseMethod::Direct);
    const auto iter = gradient_matrix(m, g, nullptr, InverseMethod::Iteration, kTight);
    const auto vec = gradient_vectorwise(m, g, nullptr, {.tolerance = 1e-12, .threads = 3});
    for (const auto* other : {&iter, &vec}) {
      EXPECT_LE((direct.d_psi - other->d_psi).lpNorm<Eigen::Infinity>(), 1e-8);
      EXPECT_LE((direct.d_eta - other->d_eta).lpNorm<Eigen::Infinity>(), 1e-8);
      EXPECT_LE((direct.d_eta0 - other->d_eta0).lpNorm<Eigen::Infinity>(), 1e-8);
    }
  }
}

TEST(Gradient, ForbiddenParametersAreZero) {
  std::mt19937_64 rng(43);
  const Pomdp m = test::random_pomdp(rng, 4, 3, 2, 0.9);
  const auto c = ConstraintSet::unconstrained(2, 2, 3).with_action(0, 1).with_successor(1, 1, 0).with_initial(0, 1);
  const PolicyGraph g = uniform_graph(c);
  for (auto method : {GradientMethod::Matrix, GradientMethod::Vectorwise}) {
    GradientStats stats;
    const auto grad = compute_gradient(m, g, c, method, kTight, &stats);
    EXPECT_EQ(grad.d_psi(0, 0), 0.0);
    EXPECT_EQ(grad.d_psi(0, 2), 0.0);
    EXPECT_EQ(grad.d_eta(1 * 2 + 1, 1), 0.0);
    EXPECT_EQ(grad.d_eta0(0, 0), 0.0);
    // Singleton rows cannot move: 3 actions, 3 * 2 successors, 2 starts.
    EXPECT_EQ(stats.parameters, 11);
    EXPECT_GT(stats.setup_ops, 0u);
  }
}

TEST(Gradient, VectorwiseWorkGrowsWithParameters) {
  std::mt19937_64 rng(44);
  const Pomdp m = test::random_pomdp(rng, 5, 2, 2, 0.9);
  const auto big = ConstraintSet::unconstrained(3, 2, 2);
  const auto small = big.with_action(0, 0).with_action(1, 0).with_action(2, 0);
  const PolicyGraph g = uniform_graph(big);
  GradientStats a, b;
  gradient_vectorwise(m, g, &big, {}, &a);
  gradient_vectorwise(m, g, &small, {}, &b);
  EXPECT_GT(a.parameters, b.parameters);
  EXPECT_GT(a.parameter_ops, b.parameter_ops);
}

TEST(Projection, InteriorStepFollowsCenteredGradient) {
  PolicyGraph g(1, 1, 2);
  g.action_dist << 0.5, 0.5;
  g.node_trans << 1.0;
  g.initial_dist << 1.0;
  GradientVector grad{Matrix(1, 2), Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  grad.d_psi << 1.0, 0.0;
  const auto c = ConstraintSet::unconstrained(1, 1, 2);
  const auto out = project_and_step(g, grad, 0.1, c);
  EXPECT_NEAR(out.psi(0, 0), 0.55, 1e-15);
  EXPECT_NEAR(out.psi(0, 1), 0.45, 1e-15);
}

TEST(Projection, VertexWithOutwardGradientStays) {
  PolicyGraph g(1, 1, 2);
  g.action_dist << 1.0, 0.0;
  g.node_trans << 1.0;
  g.initial_dist << 1.0;
  GradientVector grad{Matrix(1, 2), Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  grad.d_psi << 1.0, -1.0;
  const auto out = project_and_step(g, grad, 5.0, ConstraintSet::unconstrained(1, 1, 2));
  EXPECT_TRUE(out == g);
}

TEST(Projection, WalksAlongFaces) {
  // d = (-1/3, -1/3, 2/3) hits x0 = 0 after 0.6; the remaining 0.4 moves along
  // (0, -1/2, 1/2) until x1 = 0 after 0.2 more.
  PolicyGraph g(1, 1, 3);
  g.action_dist << 0.2, 0.3, 0.5;
  g.node_trans << 1.0;
  g.initial_dist << 1.0;
  GradientVector grad{Matrix(1, 3), Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  grad.d_psi << 0.0, 0.0, 1.0;
  const auto c = ConstraintSet::unconstrained(1, 1, 3);
  const auto walked = project_and_step(g, grad, 1.0, c, true);
  EXPECT_EQ(walked.psi(0, 0), 0.0);
  EXPECT_EQ(walked.psi(0, 1), 0.0);
  EXPECT_NEAR(walked.psi(0, 2), 1.0, 1e-15);
  const auto stopped = project_and_step(g, grad, 1.0, c, false);
  EXPECT_EQ(stopped.psi(0, 0), 0.0);
  EXPECT_NEAR(stopped.psi(0, 1), 0.1, 1e-15);
  EXPECT_NEAR(stopped.psi(0, 2), 0.9, 1e-15);
}

TEST(Projection, StaysFeasibleAndInsideConstraints) {
  std::mt19937_64 rng(45);
  for (int i = 0; i < 50; ++i) {
    const Pomdp m = test::random_pomdp(rng, 4, 3, 2, 0.9);
    const auto c = ConstraintSet::unconstrained(3, 2, 3).with_action(1, 2).with_successor(0, 1, 2);
    const PolicyGraph g = uniform_graph(c);
    const auto grad = compute_gradient(m, g, c);
    const PolicyGraph out = project_and_step(g, grad, std::pow(10.0, -3 + i % 6), c);
    EXPECT_TRUE(out.violations(1e-12).empty());
    EXPECT_EQ(out.psi(1, 2), 1.0);
    EXPECT_EQ(out.eta(0, 1, 2), 1.0);
  }
}

TEST(Ascent, LoadUnloadReachesTarget) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const Scalar optimum = test::oracle_best(m, c);
  EXPECT_NEAR(optimum, std::pow(0.95, 5) / (1 - std::pow(0.95, 6)), 1e-10);
  AscentConfig cfg;
  cfg.reference = optimum;
  const auto r = gradient_ascent(m, c, cfg);
  EXPECT_TRUE(r.reached_target);
  EXPECT_GE(r.best_value, 0.99 * optimum);
  EXPECT_LE(r.best_value, optimum + 1e-8);
  EXPECT_NEAR(evaluate(m, r.best_graph).criterion, r.best_value, 1e-8);
  // the start node stays fixed
  for (Index o = 0; o < 3; ++o) EXPECT_EQ(r.best_graph.eta0(o, 0), 1.0);
}

TEST(Ascent, HistoryIsNonDecreasing) {
  std::mt19937_64 rng(46);
  for (int i = 0; i < 5; ++i) {
    const Pomdp m = test::random_pomdp(rng, 5, 2, 2, 0.9);
    AscentConfig cfg;
    cfg.step_size = 10.0;
    cfg.max_iterations = 200;
    const auto r = gradient_ascent(m, ConstraintSet::unconstrained(2, 2, 2), cfg);
    const Scalar noise = std::max(cfg.improvement_tolerance, 10 * cfg.solver.tolerance);
    for (std::size_t k = 1; k < r.history.size(); ++k)
      EXPECT_GE(r.history[k].criterion, r.history[k - 1].criterion - noise);
  }
}

TEST(Ascent, StopsAtStationaryVertex) {
  const Pomdp m = test::single_state({1.0, 2.0}, 0.9);
  const auto c = ConstraintSet::unconstrained(1, 1, 2);
  DeterministicPolicy best{2, {1}, {0}, {0}};
  const PolicyGraph init = as_stochastic(best);
  AscentConfig cfg;
  const auto r = gradient_ascent(m, c, cfg, &init);
  EXPECT_NEAR(r.best_value, 20.0, 1e-8);
  EXPECT_LE(r.history.size(), 2u);
}

TEST(Ascent, RandomInitIsSeeded) {
  const Pomdp m = generate_load_unload({3, 0.9});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  AscentConfig cfg;
  cfg.random_init = true;
  cfg.seed = 5;
  cfg.max_iterations = 20;
  const auto a = gradient_ascent(m, c, cfg);
  const auto b = gradient_ascent(m, c, cfg);
  EXPECT_EQ(a.best_value, b.best_value);
  EXPECT_EQ(a.history.size(), b.history.size());
}

TEST(Ascent, CsvHistory) {
  const std::vector<AscentStep> h{{0, 1.5, 1.0, 0.25}, {1, 2.0, 0.5, 0.125}};
  EXPECT_EQ(history_csv(h), "iteration,criterion,step_size,gradient_norm\n0,1.5,1,0.25\n1,2,0.5,0.125\n");
}

TEST(Ascent, RejectsBadConfig) {
  const Pomdp m = test::single_state({1.0}, 0.9);
  AscentConfig cfg;
  cfg.step_size = 0;
  EXPECT_THROW(gradient_ascent(m, ConstraintSet::unconstrained(1, 1, 1), cfg), std::invalid_argument);
}
