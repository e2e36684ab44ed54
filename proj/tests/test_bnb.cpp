#include "pgraph/bnb.hpp"
#include "pgraph/io.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pgraph;

namespace {

const SolverOptions kTight{.tolerance = 1e-12};

/// A random partial: the first `depth` slots fixed to random allowed values.
PartialPolicy random_partial(std::mt19937_64& rng, const SearchSpace& space, Index depth) {
  PartialPolicy p = PartialPolicy::root(space);
  for (Index i = 0; i < depth; ++i) {
    const auto allowed = space.allowed(i);
    p = p.with_next(allowed[test::pick(rng, allowed.size())]);
  }
  return p;
}

}  // namespace

TEST(SearchSpace, SlotOrder) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const SearchSpace space(m, c);
  ASSERT_EQ(space.num_slots(), 2 + 3 + 6);
  EXPECT_EQ(space.slot(1).kind, SearchSpace::SlotKind::Action);
  EXPECT_EQ(space.slot(1).node, 1);
  EXPECT_EQ(space.slot(4).kind, SearchSpace::SlotKind::Initial);
  EXPECT_EQ(space.slot(4).observation, 2);
  const auto& eta = space.slot(2 + 3 + 1 * 3 + 2);
  EXPECT_EQ(eta.kind, SearchSpace::SlotKind::Successor);
  EXPECT_EQ(eta.node, 1);
  EXPECT_EQ(eta.observation, 2);
  EXPECT_TRUE(space.interchangeable_with_previous(1));
}

TEST(SearchSpace, InitialSlotsWithoutStartMassAreIrrelevant) {
  // The agent always starts at Unload, which emits observation 0.
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const SearchSpace space(m, c);
  EXPECT_TRUE(space.relevant(2));
  EXPECT_FALSE(space.relevant(3));
  EXPECT_FALSE(space.relevant(4));
  for (Index i = 5; i < space.num_slots(); ++i) EXPECT_TRUE(space.relevant(i));
}

TEST(SearchSpace, SuccessorSlotsOfUnrewardedStatesAreIrrelevant) {
  // Observation 1 is only emitted by a state that can never reach a reward.
  Matrix obs(3, 2);
  obs << 1, 0, 1, 0, 0, 1;
  std::vector<std::vector<Transition>> rows{{{0, 0.5, 1.0}, {2, 0.5, 0}}, {{1, 1, 0}}, {{2, 1, 0}}};
  const Pomdp m(3, 1, 2, obs, rows, 0.9, Vector::Unit(3, 0));
  const auto c = ConstraintSet::unconstrained(2, 2, 1);
  const SearchSpace space(m, c);
  const Index base = 2 + 2;
  EXPECT_TRUE(space.relevant(base + 0));
  EXPECT_FALSE(space.relevant(base + 1));
  EXPECT_FALSE(space.relevant(3));
}

TEST(Expand, OneChildPerAllowedValue) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const SearchSpace space(m, c);
  const auto root = PartialPolicy::root(space);
  const auto kids = expand(space, root);
  ASSERT_EQ(kids.size(), 2u);
  EXPECT_EQ(kids[0].choice[0], 0);
  EXPECT_EQ(kids[1].choice[0], 1);
  EXPECT_EQ(kids[1].depth, 1);
  EXPECT_EQ(kids[1].choice[1], kFree);
}

TEST(Expand, SymmetryKeepsOrderedActionPairs) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const SearchSpace space(m, c);
  std::size_t with = 0, without = 0;
  for (const auto& k : expand(space, PartialPolicy::root(space))) {
    with += expand(space, k).size();
    without += expand(space, k, {.symmetry = false}).size();
  }
  EXPECT_EQ(with, 3u);  // (0,0) (0,1) (1,1)
  EXPECT_EQ(without, 4u);
}

TEST(Expand, NoSymmetryBetweenDistinctNodes) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = reactive_constraints(m);
  const SearchSpace space(m, c);
  EXPECT_FALSE(space.interchangeable_with_previous(1));
  EXPECT_EQ(count_policies(space, true), 8u);
}

TEST(Expand, IrrelevantSlotGetsOneChild) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const SearchSpace space(m, c);
  const auto p = PartialPolicy::root(space).with_next(0).with_next(1).with_next(0);
  EXPECT_EQ(expand(space, p).size(), 1u);
  EXPECT_EQ(expand(space, p, {.reduce_irrelevant = false}).size(), 2u);
}

TEST(Enumerate, CountsEveryPolicy) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const SearchSpace space(m, c);
  EXPECT_EQ(count_policies(space, false), 2048u);  // 2^2 actions, 2^3 starts, 2^6 successors
  EXPECT_EQ(count_policies(space, true), 1536u);   // (0,0) (0,1) (1,1)
  EXPECT_THROW(enumerate_all(m, c, {.cap = 2047, .symmetry = false, .solver = {}}), CapExceeded);
}

TEST(Enumerate, MatchesBruteForceOracle) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 5; ++i) {
    const Pomdp m = test::random_pomdp(rng, 3 + i % 2, 2, 2, 0.9);
    const auto c = ConstraintSet::unconstrained(2, 2, 2);
    std::uint64_t count = 0;
    const Scalar best = test::oracle_best(m, c, &count);
    const auto report = enumerate_all(m, c, {.solver = kTight});
    EXPECT_EQ(report.nodes_expanded, count);
    EXPECT_NEAR(report.best_value, best, 1e-9);
    EXPECT_TRUE(report.proven);
    // Symmetric relabelling cannot change the optimum.
    EXPECT_NEAR(enumerate_all(m, c, {.symmetry = true, .solver = kTight}).best_value, best, 1e-9);
  }
}

TEST(UpperBound, Sandwich) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 20; ++i) {
    const Pomdp m = test::random_pomdp(rng, 4, 2, 2, 0.9);
    const auto c = ConstraintSet::unconstrained(2, 2, 2);
    const SearchSpace space(m, c);
    const auto p = random_partial(rng, space, test::pick(rng, space.num_slots()));
    const Scalar ub = upper_bound(space, p, nullptr, kTight).value.criterion;
    const auto lb = lower_bound(space, p, {}, kTight);
    EXPECT_LE(lb.value, ub + 1e-8);
    EXPECT_NEAR(lb.value, test::oracle_criterion(m, as_stochastic(lb.policy)), 1e-9);
    // The completion keeps the fixed slots.
    const auto r = restrict(space, p);
    EXPECT_TRUE(lb.policy.satisfies(r));
  }
}

TEST(UpperBound, WarmStartGivesSameBound) {
  std::mt19937_64 rng(33);
  const Pomdp m = test::random_pomdp(rng, 6, 2, 2, 0.95);
  const auto c = ConstraintSet::unconstrained(2, 2, 2);
  const SearchSpace space(m, c);
  const auto root = PartialPolicy::root(space);
  const auto parent = upper_bound(space, root, nullptr, kTight);
  const auto child = root.with_next(1);
  const auto cold = upper_bound(space, child, nullptr, kTight);
  const auto warm = upper_bound(space, child, &parent.value.values, kTight);
  EXPECT_NEAR(cold.value.criterion, warm.value.criterion, 1e-10);
  EXPECT_LE(warm.value.stats.sweeps, cold.value.stats.sweeps);
}

TEST(LowerBound, RandomCompletionIsDeterministicGivenSeed) {
  const Pomdp m = generate_load_unload({5, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  const SearchSpace space(m, c);
  const LowerBoundOptions opts{LowerBoundStrategy::Random, 42, false};
  const auto a = lower_bound(space, PartialPolicy::root(space), opts);
  const auto b = lower_bound(space, PartialPolicy::root(space), opts);
  EXPECT_EQ(a.policy, b.policy);
  EXPECT_EQ(a.value, b.value);
}

TEST(LowerBound, HeuristicFindsLoadUnloadOptimum) {
  for (Index L : {3, 5, 8}) {
    const Pomdp m = generate_load_unload({L, 0.996});
    const auto c = ConstraintSet::unconstrained(2, 3, 2);
    const SearchSpace space(m, c);
    const auto lb = lower_bound(space, PartialPolicy::root(space));
    const int trip = 2 * (L - 1);
    EXPECT_NEAR(lb.value, std::pow(0.996, trip - 1) / (1 - std::pow(0.996, trip)), 1e-7);
  }
}

TEST(LowerBound, LocalSearchNeverHurts) {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 10; ++i) {
    const Pomdp m = test::random_pomdp(rng, 4, 2, 2, 0.9);
    const auto c = ConstraintSet::unconstrained(2, 2, 2);
    const SearchSpace space(m, c);
    const auto root = PartialPolicy::root(space);
    const auto start = lower_bound(space, root, {LowerBoundStrategy::Random, static_cast<std::uint64_t>(i)});
    const auto better = improve_locally(space, root, start);
    EXPECT_GE(better.value, start.value);
    EXPECT_NEAR(better.value, test::oracle_criterion(m, as_stochastic(better.policy)), 1e-9);
  }
}

TEST(BranchAndBound, MatchesOracleUnderEveryConfiguration) {
  std::mt19937_64 rng(35);
  std::vector<SearchOptions> configs;
  for (auto order : {SearchOrder::DepthFirst, SearchOrder::BestFirst})
    for (auto mode : {LowerBoundMode::None, LowerBoundMode::Root, LowerBoundMode::EveryNode}) {
      SearchOptions o;
      o.order = order;
      o.lower_bound_mode = mode;
      o.solver = kTight;
      configs.push_back(o);
    }
  SearchOptions plain;
  plain.prune = false;
  plain.warm_start = false;
  plain.expand = {false, false};
  plain.solver = kTight;
  configs.push_back(plain);

  for (int i = 0; i < 6; ++i) {
    const Pomdp m = test::random_pomdp(rng, 3 + i % 3, 2, 2, 0.9);
    const auto c = ConstraintSet::unconstrained(2, 2, 2);
    const Scalar best = test::oracle_best(m, c);
    for (const auto& o : configs) {
      const auto r = branch_and_bound(m, c, o);
      EXPECT_TRUE(r.proven);
      EXPECT_NEAR(r.best_value, best, 1e-8);
      EXPECT_TRUE(r.best_policy.satisfies(c));
      EXPECT_NEAR(r.best_value, test::oracle_criterion(m, as_stochastic(r.best_policy)), 1e-8);
      EXPECT_GE(r.root_upper_bound + 1e-8, r.best_value);
    }
  }
}

TEST(BranchAndBound, ConstrainedSearchStaysInsideConstraints) {
  const Pomdp m = generate_maze({1, 0.2, 0.99, 0});
  const auto c = reactive_constraints(m);
  const auto r = branch_and_bound(m, c);
  EXPECT_TRUE(r.best_policy.satisfies(c));
  EXPECT_NEAR(r.best_value, enumerate_all(m, c).best_value, 1e-8);
}

TEST(BranchAndBound, PruningShrinksTheTree) {
  const Pomdp m = generate_load_unload({4, 0.95});
  const auto c = ConstraintSet::unconstrained(2, 3, 2);
  SearchOptions pruned;
  pruned.lower_bound_mode = LowerBoundMode::None;
  SearchOptions full = pruned;
  full.prune = false;
  const auto a = branch_and_bound(m, c, pruned);
  const auto b = branch_and_bound(m, c, full);
  EXPECT_NEAR(a.best_value, b.best_value, 1e-9);
  EXPECT_LT(a.nodes_expanded, b.nodes_expanded);
}

TEST(BranchAndBound, NodeCapLeavesResultUnproven) {
  std::mt19937_64 rng(36);
  const Pomdp m = test::random_pomdp(rng, 5, 2, 2, 0.9);
  SearchOptions o;
  o.lower_bound_mode = LowerBoundMode::None;
  o.node_cap = 1;
  const auto r = branch_and_bound(m, ConstraintSet::unconstrained(2, 2, 2), o);
  EXPECT_FALSE(r.proven);
  EXPECT_LE(r.nodes_expanded, 1u);
}

TEST(BranchAndBound, TraceLines) {
  const Pomdp m = generate_load_unload({3, 0.95});
  SearchOptions o;
  o.lower_bound_mode = LowerBoundMode::None;
  o.trace = true;
  const auto r = branch_and_bound(m, ConstraintSet::unconstrained(2, 3, 2), o);
  ASSERT_FALSE(r.trace.empty());
  for (const auto& line : r.trace) EXPECT_EQ(std::count(line.begin(), line.end(), '\t'), 4) << line;
}
