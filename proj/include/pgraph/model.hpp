#pragma once

#include "pgraph/core.hpp"

#include <span>
#include <string>
#include <vector>

namespace pgraph {

/// One nonzero entry of T(s, a, ·), with the reward R(s, a, s') of that transition.
struct Transition {
  Index next;
  Scalar prob;
  Scalar reward;

  bool operator==(const Transition&) const = default;
};

/// Optional display names; never used by the numerics.
struct Names {
  std::vector<std::string> states;
  std::vector<std::string> actions;
  std::vector<std::string> observations;
};

/**
 * Finite POMDP (S, O, A, B, T, R) with discount and initial belief.
 *
 * T is stored sparsely: each (s, a) row keeps only its successors, sorted by
 * state index, so a backup over a row costs its branching factor. Rewards live
 * next to the transition they belong to; R(s, a, s') for a zero-probability
 * transition is not representable and reads as 0. B is dense (|S| x |O|).
 *
 * The constructor only checks shapes. Stochasticity is reported by
 * validate_pomdp() so that malformed models can still be inspected.
 */
class Pomdp {
 public:
  Pomdp(Index num_states, Index num_actions, Index num_observations, Matrix obs,
        std::vector<std::vector<Transition>> rows, Scalar discount, Vector initial_belief,
        Names names = {});

  Index num_states() const noexcept { return num_states_; }
  Index num_actions() const noexcept { return num_actions_; }
  Index num_observations() const noexcept { return num_observations_; }

  /// B(s, o) as a |S| x |O| matrix.
  const Matrix& obs() const noexcept { return obs_; }
  Scalar obs(Index s, Index o) const { return obs_(s, o); }

  std::span<const Transition> successors(Index s, Index a) const {
    const auto row = static_cast<std::size_t>(s) * num_actions_ + a;
    return {entries_.data() + offsets_[row], entries_.data() + offsets_[row + 1]};
  }

  Scalar trans(Index s, Index a, Index next) const;
  Scalar reward(Index s, Index a, Index next) const;

  /// Σ_{s'} T(s, a, s') R(s, a, s').
  Scalar expected_reward(Index s, Index a) const;

  Scalar discount() const noexcept { return discount_; }
  const Vector& initial_belief() const noexcept { return initial_belief_; }
  const Names& names() const noexcept { return names_; }

  std::size_t num_transitions() const noexcept { return entries_.size(); }
  /// Largest number of successors of any (s, a).
  Index max_branching() const;

  /// Same model with a different discount factor.
  Pomdp with_discount(Scalar discount) const;

  /// Field-by-field comparison, probabilities and rewards within `tol`.
  bool approx_equal(const Pomdp& other, Scalar tol) const;

 private:
  Index num_states_;
  Index num_actions_;
  Index num_observations_;
  Matrix obs_;
  std::vector<std::size_t> offsets_;
  std::vector<Transition> entries_;
  Scalar discount_;
  Vector initial_belief_;
  Names names_;
};

/**
 * Stochastic policy graph.
 *
 *   action_dist   |N| x |A|        ψ(n, a)
 *   node_trans    |N||O| x |N|     η(n, o, n'), row n*|O| + o
 *   initial_dist  |O| x |N|        η⁰(o, n)
 *
 * Every row of every table is a distribution.
 */
struct PolicyGraph {
  Matrix action_dist;
  Matrix node_trans;
  Matrix initial_dist;

  PolicyGraph() = default;
  PolicyGraph(Index num_nodes, Index num_observations, Index num_actions);

  Index num_nodes() const { return static_cast<Index>(action_dist.rows()); }
  Index num_actions() const { return static_cast<Index>(action_dist.cols()); }
  Index num_observations() const { return static_cast<Index>(initial_dist.rows()); }

  Scalar psi(Index n, Index a) const { return action_dist(n, a); }
  Scalar eta(Index n, Index o, Index next) const {
    return node_trans(n * num_observations() + o, next);
  }
  Scalar eta0(Index o, Index n) const { return initial_dist(o, n); }

  Index trans_row(Index n, Index o) const { return n * num_observations() + o; }

  /// Row-stochasticity and range violations, one message each.
  std::vector<std::string> violations(Scalar tol = kProbabilityTolerance) const;
  bool is_deterministic() const;

  bool operator==(const PolicyGraph& other) const;
};

/**
 * Restriction constraints on a policy graph: the actions allowed in each node,
 * the successors allowed per (node, observation), and the initial nodes allowed
 * per observation. Index lists are sorted, unique and non-empty.
 */
class ConstraintSet {
 public:
  ConstraintSet(Index num_nodes, Index num_observations, Index num_actions,
                std::vector<std::vector<Index>> allowed_actions,
                std::vector<std::vector<Index>> allowed_successors,
                std::vector<std::vector<Index>> allowed_initial);

  static ConstraintSet unconstrained(Index num_nodes, Index num_observations, Index num_actions);

  Index num_nodes() const noexcept { return num_nodes_; }
  Index num_observations() const noexcept { return num_observations_; }
  Index num_actions() const noexcept { return num_actions_; }

  std::span<const Index> actions(Index n) const { return actions_[n]; }
  std::span<const Index> successors(Index n, Index o) const {
    return successors_[static_cast<std::size_t>(n) * num_observations_ + o];
  }
  std::span<const Index> initial(Index o) const { return initial_[o]; }

  bool allows_action(Index n, Index a) const;
  bool allows_successor(Index n, Index o, Index next) const;
  bool allows_initial(Index o, Index n) const;

  ConstraintSet with_action(Index n, Index a) const;
  ConstraintSet with_successor(Index n, Index o, Index next) const;
  ConstraintSet with_initial(Index o, Index n) const;
  /// Every observation starts in `node` (restricted to the allowed set when possible).
  ConstraintSet with_fixed_start(Index node = 0) const;

  /// The same constraints with the labels of nodes i and j exchanged.
  ConstraintSet swapped(Index i, Index j) const;

  /// True when every allowed set here is contained in the matching set of `looser`.
  bool is_tighter_than(const ConstraintSet& looser) const;

  bool operator==(const ConstraintSet&) const = default;

 private:
  Index num_nodes_;
  Index num_observations_;
  Index num_actions_;
  std::vector<std::vector<Index>> actions_;
  std::vector<std::vector<Index>> successors_;
  std::vector<std::vector<Index>> initial_;
};

/// A deterministic policy graph: one action per node, one successor per
/// (node, observation), one initial node per observation.
struct DeterministicPolicy {
  Index num_actions = 0;
  std::vector<Index> action_of;  // |N|
  std::vector<Index> succ_of;    // |N||O|, n*|O| + o
  std::vector<Index> init_of;    // |O|

  Index num_nodes() const { return static_cast<Index>(action_of.size()); }
  Index num_observations() const { return static_cast<Index>(init_of.size()); }
  Index successor(Index n, Index o) const { return succ_of[n * num_observations() + o]; }

  bool satisfies(const ConstraintSet& constraints) const;

  bool operator==(const DeterministicPolicy&) const = default;
};

/// An invariant violation found by validate_pomdp().
struct Violation {
  enum class Kind { Observation, Transition, NegativeEntry, InitialBelief, Discount, Range };

  Kind kind;
  std::string location;
  Scalar magnitude;  // offending row sum, entry or discount

  std::string message() const;
};

/// Every invariant violation of `model`; empty iff the model is valid.
std::vector<Violation> validate_pomdp(const Pomdp& model, Scalar tol = kProbabilityTolerance);

/// Throws ValidationError listing the violations, if any.
void require_valid(const Pomdp& model);

/// Reactive-policy structure: |O| nodes, node o is the only successor and the
/// only initial node after observation o, every action allowed everywhere.
ConstraintSet reactive_constraints(const Pomdp& model);

/// Successors of node n restricted to nodes within circular distance k of n.
ConstraintSet neighborhood_constraints(Index num_nodes, Index num_observations, Index num_actions,
                                       Index k);

/// Point-mass policy graph of a complete deterministic policy.
PolicyGraph as_stochastic(const DeterministicPolicy& det);

/// Argmax of every row (ties to the lowest index). Inverse of as_stochastic().
DeterministicPolicy extract_deterministic(const PolicyGraph& graph);

/// Uniform distributions over the allowed choices of every row.
PolicyGraph uniform_graph(const ConstraintSet& constraints);

}  // namespace pgraph
