#pragma once

#include "pgraph/model.hpp"

#include <cstdint>
#include <vector>

namespace pgraph {

/**
 * Successive-approximation settings shared by every Bellman solve.
 *
 * Iteration stops once the returned values are certified to lie within
 * `tolerance` (sup-norm) of the fixed point. The certificate is the classical
 * span bound for contractions with row-stochastic transitions: after a sweep
 * V' = L V, the fixed point lies in V' + γ/(1-γ) [min(V'-V), max(V'-V)], and the
 * midpoint of that box is returned.
 */
struct SolverOptions {
  Scalar tolerance = 1e-9;
  /// 0 selects 10 * ceil(log(1e-9 (1-γ)) / log γ).
  int max_sweeps = 0;
  /// Rows of a sweep are split across this many workers. Sweeps are Jacobi
  /// style, so the result does not depend on the worker count.
  int threads = 1;
  bool record_residuals = false;
};

struct SolveStats {
  int sweeps = 0;
  Scalar residual = 0;     ///< last sup-norm change between iterates
  Scalar error_bound = 0;  ///< certified sup-norm error of the returned values
  std::uint64_t backup_ops = 0;
  std::vector<Scalar> residuals;
};

/// Value over the cross-product states (n, s), stored at n*|S| + s.
struct CrossValue {
  Vector values;
  Scalar criterion = 0;
  SolveStats stats;
};

/// Markov chain induced on N x S by a fixed policy graph.
struct ChainMatrices {
  SparseMatrix trans_bar;
  Vector cost_bar;
};

int default_sweep_cap(Scalar discount);

/// T̄ and C̄ of the node-state chain; only nonzero entries are stored.
ChainMatrices build_chain(const Pomdp& model, const PolicyGraph& graph);

/// π̄⁰(n, s) = π⁰(s) Σ_o B(s, o) η⁰(o, n).
Vector initial_joint(const Pomdp& model, const PolicyGraph& graph);

/// Solves V = c + γ T V by successive approximation. `warm` may be null.
Vector solve_linear(const SparseMatrix& trans, const Vector& cost, Scalar discount,
                    const Vector* warm, const SolverOptions& options, SolveStats& stats);

/// Value of a stochastic policy graph.
CrossValue evaluate(const Pomdp& model, const PolicyGraph& graph,
                    const SolverOptions& options = {});

/// Same as evaluate() through a dense LU factorisation; meant for small
/// cross-product spaces (|N||S| up to a few thousand) and as a test oracle.
CrossValue evaluate_direct(const Pomdp& model, const PolicyGraph& graph);

/// Criterion of a deterministic policy, solving only over the node-state
/// pairs reachable from the initial distribution.
Scalar evaluate_criterion(const Pomdp& model, const DeterministicPolicy& policy,
                          const SolverOptions& options = {});

/// A POMDP coupled with a node count and restriction constraints.
struct CrossModel {
  const Pomdp& pomdp;
  const ConstraintSet& constraints;

  Index num_nodes() const { return constraints.num_nodes(); }
};

/// Optimum of the constrained cross-product MDP and its greedy choices.
struct OptimalSolution {
  CrossValue value;
  std::vector<Index> best_action;     ///< (n, s) at n*|S| + s
  std::vector<Index> best_successor;  ///< (n, o, s') at (n*|O| + o)*|S| + s'
  std::vector<Index> best_initial;    ///< (o, s) at o*|S| + s

  Index action(Index n, Index s, Index num_states) const {
    return best_action[static_cast<std::size_t>(n) * num_states + s];
  }
};

/**
 * Solves
 *
 *   V(n,s) = max_{a ∈ A(n)} Σ_{s'} T(s,a,s') [R(s,a,s') + γ Σ_o B(s',o) max_{n' ∈ N(n,o)} V(n',s')]
 *
 * and returns π̄⁰ V with η⁰ maximised over the allowed initial nodes. The inner
 * maxima are evaluated once per distinct allowed-successor set and the action
 * backup once per group of nodes with identical constraints, so a sweep over
 * an unconstrained root costs the same as a sweep of the underlying MDP.
 */
OptimalSolution solve_optimal(const CrossModel& model, const Vector* warm_start = nullptr,
                              const SolverOptions& options = {});

/// Optimal value function V* of the fully observable MDP (S, A, T, R).
Vector solve_underlying_mdp(const Pomdp& model, const SolverOptions& options = {});

}  // namespace pgraph
