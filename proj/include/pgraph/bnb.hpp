#pragma once

#include "pgraph/xproduct.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace pgraph {

inline constexpr Index kFree = -1;

/// Absolute slack below which a partial policy's upper bound counts as no
/// better than the incumbent.
inline constexpr Scalar kPruneSlack = 1e-9;

/**
 * The parameter slots of a deterministic policy graph, in the order they are
 * fixed: ψ slots (one per node), then η⁰ slots (one per observation), then η
 * slots (one per node and observation, row n*|O| + o).
 *
 * A slot is irrelevant when its choice cannot change the criterion: an η slot
 * whose observation is never emitted in a reachable state that can still earn
 * reward, or an η⁰ slot whose observation carries no initial mass outside the
 * zero-value states.
 */
class SearchSpace {
 public:
  enum class SlotKind { Action, Initial, Successor };
  struct Slot {
    SlotKind kind;
    Index node;         // Action and Successor slots
    Index observation;  // Initial and Successor slots
  };

  SearchSpace(const Pomdp& model, const ConstraintSet& constraints);

  const Pomdp& model() const noexcept { return *model_; }
  const ConstraintSet& constraints() const noexcept { return *constraints_; }

  Index num_slots() const noexcept { return static_cast<Index>(slots_.size()); }
  const Slot& slot(Index i) const { return slots_[i]; }
  std::span<const Index> allowed(Index i) const;
  bool relevant(Index i) const { return relevant_[i]; }

  /// True when the constraints are unchanged by exchanging nodes n-1 and n.
  bool interchangeable_with_previous(Index n) const { return interchangeable_[n]; }

 private:
  const Pomdp* model_;
  const ConstraintSet* constraints_;
  std::vector<Slot> slots_;
  std::vector<bool> relevant_;
  std::vector<bool> interchangeable_;
};

/// A deterministic graph under construction: slots are fixed strictly in
/// slot order, so the first `depth` slots are fixed and the rest are kFree.
struct PartialPolicy {
  std::vector<Index> choice;
  Index depth = 0;

  static PartialPolicy root(const SearchSpace& space);
  bool complete() const { return depth == static_cast<Index>(choice.size()); }
  PartialPolicy with_next(Index value) const;
};

/// The base constraints with every fixed slot narrowed to its choice.
ConstraintSet restrict(const SearchSpace& space, const PartialPolicy& partial);

/// The policy of a complete partial.
DeterministicPolicy to_policy(const SearchSpace& space, const PartialPolicy& partial);

/// Optimum of the cross-product MDP under restrict(partial). `warm` may be a
/// parent's value function.
OptimalSolution upper_bound(const SearchSpace& space, const PartialPolicy& partial,
                            const Vector* warm = nullptr, const SolverOptions& options = {});

enum class LowerBoundStrategy { Random, Heuristic };

struct LowerBoundOptions {
  LowerBoundStrategy strategy = LowerBoundStrategy::Heuristic;
  std::uint64_t seed = 0;
  /// One pass over the completed slots, keeping strict improvements.
  bool local_search = false;
};

struct LowerBound {
  Scalar value = 0;
  DeterministicPolicy policy;
  int evaluations = 0;
};

/**
 * Completes `partial` and evaluates the result.
 *
 * Random: every free slot draws uniformly from its allowed set.
 * Heuristic: free action slots take the actions the bound's greedy policy uses
 * most, weighted by discounted occupancy (successive free nodes take
 * successive ranks); the bound is then re-solved with the actions fixed and
 * the free η⁰ and η slots take the node maximising the expected value of the
 * states they lead into.
 */
LowerBound lower_bound(const SearchSpace& space, const PartialPolicy& partial,
                       const LowerBoundOptions& lb = {}, const SolverOptions& options = {});

/// One pass over the slots `partial` leaves free: each takes its best
/// alternative when that beats the current value by more than 1e-10.
LowerBound improve_locally(const SearchSpace& space, const PartialPolicy& partial, LowerBound start,
                           const SolverOptions& options = {});

struct ExpandOptions {
  /// Require non-decreasing action indices across interchangeable nodes.
  bool symmetry = true;
  /// Give irrelevant slots a single child.
  bool reduce_irrelevant = true;
};

/// One child per admissible value of the first free slot.
std::vector<PartialPolicy> expand(const SearchSpace& space, const PartialPolicy& partial,
                                  const ExpandOptions& options = {});

enum class SearchOrder { DepthFirst, BestFirst };
enum class LowerBoundMode { None, Root, EveryNode };

struct SearchOptions {
  SearchOrder order = SearchOrder::DepthFirst;
  ExpandOptions expand;
  bool prune = true;
  bool warm_start = true;
  LowerBoundMode lower_bound_mode = LowerBoundMode::Root;
  LowerBoundOptions lower_bound{LowerBoundStrategy::Heuristic, 0, true};
  SolverOptions solver;
  /// 0 = unlimited.
  std::uint64_t node_cap = 0;
  double time_cap_seconds = 0;
  bool trace = false;
};

struct SearchReport {
  DeterministicPolicy best_policy;
  Scalar best_value = 0;
  /// False when a node or time cap stopped the search early.
  bool proven = false;
  Scalar root_upper_bound = 0;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t bound_solves = 0;
  std::uint64_t policy_evaluations = 0;
  double wall_time_seconds = 0;
  /// One tab-separated line per generated child: depth, slot, choice, upper
  /// bound, incumbent.
  std::vector<std::string> trace;
};

SearchReport branch_and_bound(const Pomdp& model, const ConstraintSet& constraints,
                              const SearchOptions& options = {});

struct EnumerateOptions {
  std::uint64_t cap = 1'000'000;
  /// Skip policies violating the symmetry rule.
  bool symmetry = false;
  SolverOptions solver;
};

/// Number of complete policies enumerate_all would visit.
std::uint64_t count_policies(const SearchSpace& space, bool symmetry);

/// Evaluates every complete deterministic policy; throws CapExceeded before
/// starting when there are more than `cap`. nodes_expanded is the count.
SearchReport enumerate_all(const Pomdp& model, const ConstraintSet& constraints,
                           const EnumerateOptions& options = {});

}  // namespace pgraph
