#include "pgraph/io.hpp"
#include "pgraph/xproduct.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

using namespace pgraph;

namespace {

std::string fixture(const std::string& name) { return std::string(PGRAPH_FIXTURES) + "/" + name; }

std::vector<Pomdp> generated_models() {
  std::vector<Pomdp> out;
  for (Index L = 2; L <= 8; ++L) out.push_back(generate_load_unload({L, 0.996}));
  for (Index L = 1; L <= 6; ++L)
    for (std::uint64_t seed : {0, 1}) out.push_back(generate_maze({L, 0.2, 0.99, seed}));
  out.push_back(generate_maze({3, 0.0, 0.9, 0}));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 5; ++i) out.push_back(test::random_pomdp(rng, 3 + i, 2, 2, 0.9));
  return out;
}

}  // namespace

TEST(PomdpParser, ReadsSmallFile) {
  const Pomdp m = read_pomdp_file(fixture("tiny.pomdp"));
  ASSERT_EQ(m.num_states(), 2);
  ASSERT_EQ(m.num_actions(), 2);
  ASSERT_EQ(m.num_observations(), 2);
  EXPECT_DOUBLE_EQ(m.discount(), 0.9);
  EXPECT_DOUBLE_EQ(m.trans(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.trans(0, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.trans(1, 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.obs(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.obs(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(m.reward(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m.reward(1, 1, 0), 0.5);
  EXPECT_DOUBLE_EQ(m.reward(1, 0, 1), 0.0);
  EXPECT_EQ(m.names().states[1], "right");
  EXPECT_EQ(m.names().observations[0], "hint");
}

TEST(PomdpParser, SingleStateValueIsGeometricSeries) {
  const Pomdp m = parse_pomdp(
      "discount: 0.9\nvalues: reward\nstates: 1\nactions: 1\nobservations: 1\n"
      "T: * uniform\nO: * uniform\nR: * : * : * : * 2.5\n");
  const PolicyGraph g = uniform_graph(ConstraintSet::unconstrained(1, 1, 1));
  EXPECT_NEAR(evaluate(m, g).criterion, 2.5 / (1 - 0.9), 1e-9);
}

TEST(PomdpParser, ObservationDependentRewardsAreAveraged) {
  const Pomdp m = parse_pomdp(
      "discount: 0.5\nvalues: reward\nstates: 1\nactions: 1\nobservations: 2\n"
      "T: * uniform\nO: * : 0 : 0 0.25\nO: * : 0 : 1 0.75\n"
      "R: * : * : * : 0 4\nR: * : * : * : 1 8\n");
  EXPECT_DOUBLE_EQ(m.reward(0, 0, 0), 0.25 * 4 + 0.75 * 8);
}

TEST(PomdpParser, RoundTripsGeneratedModels) {
  for (const auto& m : generated_models()) {
    const std::string text = write_pomdp(m);
    const Pomdp back = parse_pomdp(text);
    EXPECT_TRUE(m.approx_equal(back, 1e-12));
    EXPECT_EQ(write_pomdp(back), text);
  }
}

struct MalformedCase {
  const char* file;
  bool parse_error;  // otherwise ValidationError
  int line;          // 0 = not checked
  const char* message;
};

class MalformedPomdp : public ::testing::TestWithParam<MalformedCase> {};

TEST_P(MalformedPomdp, IsRejectedWithDiagnostic) {
  const auto& c = GetParam();
  try {
    read_pomdp_file(fixture(c.file));
    FAIL() << c.file << " was accepted";
  } catch (const ParseError& e) {
    ASSERT_TRUE(c.parse_error) << e.what();
    if (c.line) {
      EXPECT_EQ(e.line(), c.line) << e.what();
    }
    EXPECT_NE(std::string(e.what()).find(c.message), std::string::npos) << e.what();
  } catch (const ValidationError& e) {
    ASSERT_FALSE(c.parse_error) << e.what();
    EXPECT_NE(std::string(e.what()).find(c.message), std::string::npos) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Fixtures, MalformedPomdp,
    ::testing::Values(MalformedCase{"action_dependent_obs.pomdp", true, 0, "action-dependent observation model"},
                      MalformedCase{"bad_number.pomdp", true, 7, "expected a number"},
                      MalformedCase{"unknown_state.pomdp", true, 6, "unknown state 'office'"},
                      MalformedCase{"transition_row_sum.pomdp", false, 0, "transition row"},
                      MalformedCase{"missing_discount.pomdp", true, 0, "missing 'discount:'"}));

TEST(PomdpParser, MissingFileIsReported) { EXPECT_ANY_THROW(read_pomdp_file(fixture("absent.pomdp"))); }

TEST(LoadUnload, Dimensions) {
  const Pomdp m = generate_load_unload({8, 0.996});
  EXPECT_EQ(m.num_states(), 14);
  EXPECT_EQ(m.num_observations(), 3);
  EXPECT_EQ(m.num_actions(), 2);
  EXPECT_TRUE(validate_pomdp(m).empty());
  EXPECT_EQ(generate_load_unload({2, 0.9}).num_states(), 2);
  EXPECT_THROW(generate_load_unload({1, 0.9}), std::invalid_argument);
}

TEST(LoadUnload, OptimalValueIsOneRewardPerRoundTrip) {
  // A round trip over L locations takes 2(L-1) moves and pays on the last one.
  for (Index L : {2, 4, 8}) {
    const Scalar gamma = 0.95;
    const Pomdp m = generate_load_unload({L, gamma});
    const Vector v = solve_underlying_mdp(m, {.tolerance = 1e-12});
    const int trip = 2 * (L - 1);
    EXPECT_NEAR(m.initial_belief().dot(v), std::pow(gamma, trip - 1) / (1 - std::pow(gamma, trip)), 1e-9);
  }
}

TEST(Maze, SmallestInstance) {
  const Pomdp m = generate_maze({1, 0.2, 0.99, 0});
  EXPECT_EQ(m.num_states(), 9);
  EXPECT_EQ(m.num_observations(), 9);
  EXPECT_EQ(m.num_actions(), 4);
  EXPECT_LE(m.max_branching(), 2);
  EXPECT_TRUE(validate_pomdp(m).empty());
  EXPECT_EQ(maze_observation_names().size(), 9u);
}

TEST(Maze, SizesAndObservationsAcrossTheFamily) {
  std::set<Index> seen;
  for (Index L = 1; L <= 4; ++L) {
    const Pomdp m = generate_maze({L, 0.1, 0.99, 0});
    EXPECT_EQ(m.num_states(), 4 * L + 5);
    for (Index s = 0; s < m.num_states(); ++s)
      for (Index o = 0; o < 9; ++o)
        if (m.obs(s, o) > 0) {
          EXPECT_EQ(m.obs(s, o), 1.0);
          seen.insert(o);
        }
  }
  EXPECT_EQ(seen.size(), 9u);
}

TEST(Maze, ExactlyTwoShortestPaths) {
  for (Index L : {1, 3, 10}) {
    for (std::uint64_t seed : {0, 1}) {
      const Pomdp m = generate_maze({L, 0.0, 0.99, seed});
      const Index S = m.num_states();
      Index start = 0;
      m.initial_belief().maxCoeff(&start);
      Index goal = -1;
      for (Index s = 0; s < S; ++s)
        if (m.obs(s, 8) == 1.0) goal = s;
      ASSERT_GE(goal, 0);
      // BFS counting shortest paths.
      std::vector<int> dist(S, -1);
      std::vector<std::uint64_t> paths(S, 0);
      std::deque<Index> queue{start};
      dist[start] = 0;
      paths[start] = 1;
      while (!queue.empty()) {
        const Index s = queue.front();
        queue.pop_front();
        if (s == goal) continue;
        std::set<Index> next;
        for (Index a = 0; a < 4; ++a)
          for (const auto& t : m.successors(s, a))
            if (t.next != s) next.insert(t.next);
        for (Index n : next) {
          if (dist[n] < 0) {
            dist[n] = dist[s] + 1;
            queue.push_back(n);
          }
          if (dist[n] == dist[s] + 1) paths[n] += paths[s];
        }
      }
      EXPECT_EQ(dist[goal], 2 * L + 3);
      EXPECT_EQ(paths[goal], 2u);
    }
  }
}

TEST(Maze, FullyObservableValueMatchesClosedForm) {
  // Each attempted move succeeds with probability q, so one step of progress
  // discounts by qγ / (1 - (1-q)γ); the reward arrives on the last step.
  for (Scalar slip : {0.0, 0.2}) {
    for (Index L : {1, 5}) {
      const Scalar gamma = 0.99;
      const Pomdp m = generate_maze({L, slip, gamma, 0});
      const Vector v = solve_underlying_mdp(m, {.tolerance = 1e-12});
      const Scalar f = (1 - slip) * gamma / (1 - slip * gamma);
      EXPECT_NEAR(m.initial_belief().dot(v), std::pow(f, 2 * L + 3) / gamma, 1e-9);
    }
  }
}

TEST(Maze, MirrorHasTheSameValue) {
  const Pomdp a = generate_maze({4, 0.2, 0.99, 0});
  const Pomdp b = generate_maze({4, 0.2, 0.99, 1});
  EXPECT_FALSE(a.approx_equal(b, 0));
  EXPECT_NEAR(a.initial_belief().dot(solve_underlying_mdp(a)), b.initial_belief().dot(solve_underlying_mdp(b)),
              1e-8);
}

TEST(Maze, RejectsBadArguments) {
  EXPECT_THROW(generate_maze({0, 0.2, 0.99, 0}), std::invalid_argument);
  EXPECT_THROW(generate_maze({1, 1.0, 0.99, 0}), std::invalid_argument);
  EXPECT_THROW(generate_maze({1, 0.2, 1.0, 0}), std::invalid_argument);
}

TEST(PolicyFile, StochasticRoundTripIsExact) {
  std::mt19937_64 rng(3);
  const PolicyGraph g = test::random_graph(rng, 3, 2, 4);
  const std::string text = write_policy_graph(g);
  EXPECT_NE(text.find("deterministic no"), std::string::npos);
  EXPECT_TRUE(read_policy_graph(text) == g);
}

TEST(PolicyFile, DeterministicRoundTrip) {
  std::mt19937_64 rng(5);
  const auto c = ConstraintSet::unconstrained(3, 2, 4);
  const PolicyGraph g = as_stochastic(test::random_policy(rng, c));
  const std::string text = write_policy_graph(g);
  EXPECT_NE(text.find("deterministic yes"), std::string::npos);
  const PolicyGraph back = read_policy_graph(text);
  EXPECT_TRUE(back == g);
  EXPECT_TRUE(back.is_deterministic());
}

TEST(PolicyFile, MalformedInputs) {
  const std::string header = "pgraph 1\nnodes 1\nobservations 1\nactions 2\n";
  // wrong version
  EXPECT_THROW(read_policy_graph("pgraph 2\n"), ParseError);
  // bad determinism flag
  EXPECT_THROW(read_policy_graph(header + "deterministic maybe\n"), ParseError);
  // choice out of range
  EXPECT_THROW(read_policy_graph(header + "deterministic yes\npsi\n2\neta0\n0\neta\n0\n"), ParseError);
  // truncated
  EXPECT_THROW(read_policy_graph(header + "deterministic no\npsi\n0.5 0.5\neta0\n"), ParseError);
  // rows that are not distributions
  EXPECT_THROW(read_policy_graph(header + "deterministic no\npsi\n0.5 0.6\neta0\n1\neta\n1\n"), ValidationError);
  // trailing garbage
  EXPECT_THROW(read_policy_graph(header + "deterministic yes\npsi\n1\neta0\n0\neta\n0\nextra\n"), ParseError);
}

TEST(ConstraintFile, RestrictsOnlyMentionedSets) {
  const auto c = read_constraints("# comment\nactions 1 : 0 2\nsuccessors 0 1 : 1\ninitial 0 : 0\n", 2, 2, 3);
  EXPECT_EQ(c.actions(0).size(), 3u);
  ASSERT_EQ(c.actions(1).size(), 2u);
  EXPECT_EQ(c.actions(1)[1], 2);
  ASSERT_EQ(c.successors(0, 1).size(), 1u);
  EXPECT_EQ(c.successors(0, 1)[0], 1);
  EXPECT_EQ(c.successors(0, 0).size(), 2u);
  EXPECT_EQ(c.initial(0).size(), 1u);
  EXPECT_EQ(c.initial(1).size(), 2u);
  EXPECT_THROW(read_constraints("actions 0 : 5\n", 2, 2, 3), ParseError);
  EXPECT_THROW(read_constraints("colour 0 : 1\n", 2, 2, 3), ParseError);
}
