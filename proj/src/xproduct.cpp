#include "pgraph/xproduct.hpp"

#include "parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pgraph {

namespace {

/// Nonzero observations of each state, as a CSR list of (o, B(s, o)).
struct ObservationSupport {
  std::vector<std::size_t> offsets;
  std::vector<std::pair<Index, Scalar>> entries;

  explicit ObservationSupport(const Pomdp& model) {
    offsets.push_back(0);
    for (Index s = 0; s < model.num_states(); ++s) {
      for (Index o = 0; o < model.num_observations(); ++o)
        if (model.obs(s, o) != 0.0) entries.emplace_back(o, model.obs(s, o));
      offsets.push_back(entries.size());
    }
  }

  std::span<const std::pair<Index, Scalar>> of(Index s) const {
    return {entries.data() + offsets[s], entries.data() + offsets[s + 1]};
  }
};

/// Drives a Bellman operator to its fixed point. `sweep(in, out)` must write
/// every entry of `out` from `in` only.
template <class Sweep>
Vector fixed_point(Index size, Scalar gamma, const Vector* warm, const SolverOptions& options,
                   SolveStats& stats, std::uint64_t ops_per_sweep, Sweep&& sweep,
                   const char* what) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
  Vector current = (warm != nullptr && warm->size() == size) ? *warm : Vector::Zero(size);
  Vector next(size);
  const int cap = options.max_sweeps > 0 ? options.max_sweeps : default_sweep_cap(gamma);
  const Scalar scale = gamma / (1.0 - gamma);

  stats = SolveStats{};
  for (int k = 1; k <= cap; ++k) {
    sweep(current, next);
    stats.backup_ops += ops_per_sweep;

    Scalar lo = std::numeric_limits<Scalar>::infinity();
    Scalar hi = -lo;
    Scalar sup = 0;
    for (Index i = 0; i < size; ++i) {
      const Scalar d = next[i] - current[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      sup = std::max(sup, std::abs(d));
    }
    stats.sweeps = k;
    stats.residual = sup;
    if (options.record_residuals) stats.residuals.push_back(sup);

    const Scalar bound = scale * (hi - lo) / 2;
    if (bound <= options.tolerance) {
      if (scale > 0) next.array() += scale * (hi + lo) / 2;
      stats.error_bound = bound;
      return next;
    }
    current.swap(next);
  }
  throw ConvergenceError(what, stats.residual, stats.sweeps);
}

}  // namespace

int default_sweep_cap(Scalar discount) {
  if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
  if (discount == 0.0) return 10;
  const double sweeps = std::ceil(std::log(1e-9 * (1.0 - discount)) / std::log(discount));
  return static_cast<int>(10 * std::max(1.0, sweeps));
}

ChainMatrices build_chain(const Pomdp& model, const PolicyGraph& graph) {
  const Index S = model.num_states();
  const Index N = graph.num_nodes();
  const Index O = model.num_observations();
  if (graph.num_actions() != model.num_actions() || graph.num_observations() != O ||
      graph.node_trans.rows() != static_cast<Eigen::Index>(N) * O)
    throw std::invalid_argument("policy graph dimensions do not match the POMDP");

  // Nonzero successors of every (n, o).
  std::vector<std::vector<std::pair<Index, Scalar>>> next_nodes(static_cast<std::size_t>(N) * O);
  for (Index r = 0; r < N * O; ++r)
    for (Index m = 0; m < N; ++m)
      if (graph.node_trans(r, m) != 0.0) next_nodes[r].emplace_back(m, graph.node_trans(r, m));
  const ObservationSupport support(model);

  ChainMatrices chain;
  chain.cost_bar = Vector::Zero(static_cast<Eigen::Index>(N) * S);
  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  for (Index n = 0; n < N; ++n) {
    for (Index s = 0; s < S; ++s) {
      const Index row = n * S + s;
      for (Index a = 0; a < model.num_actions(); ++a) {
        const Scalar psi = graph.action_dist(n, a);
        if (psi == 0.0) continue;
        for (const auto& t : model.successors(s, a)) {
          const Scalar w = psi * t.prob;
          chain.cost_bar[row] += w * t.reward;
          for (const auto& [o, b] : support.of(t.next))
            for (const auto& [m, eta] : next_nodes[n * O + o])
              triplets.emplace_back(row, m * S + t.next, w * b * eta);
        }
      }
    }
  }
  chain.trans_bar.resize(static_cast<Index>(N) * S, static_cast<Index>(N) * S);
  chain.trans_bar.setFromTriplets(triplets.begin(), triplets.end());
  chain.trans_bar.makeCompressed();
  return chain;
}

Vector initial_joint(const Pomdp& model, const PolicyGraph& graph) {
  const Index S = model.num_states();
  const Index N = graph.num_nodes();
  Vector joint = Vector::Zero(static_cast<Eigen::Index>(N) * S);
  for (Index s = 0; s < S; ++s) {
    const Scalar p = model.initial_belief()[s];
    if (p == 0.0) continue;
    for (Index o = 0; o < model.num_observations(); ++o) {
      const Scalar b = model.obs(s, o);
      if (b == 0.0) continue;
      for (Index n = 0; n < N; ++n) joint[n * S + s] += p * b * graph.initial_dist(o, n);
    }
  }
  return joint;
}

Vector solve_linear(const SparseMatrix& trans, const Vector& cost, Scalar discount,
                    const Vector* warm, const SolverOptions& options, SolveStats& stats) {
  const Index size = static_cast<Index>(cost.size());
  auto sweep = [&](const Vector& in, Vector& out) {
    detail::parallel_for(size, options.threads, [&](long begin, long end) {
      for (long i = begin; i < end; ++i) {
        Scalar acc = 0;
        for (SparseMatrix::InnerIterator it(trans, static_cast<Index>(i)); it; ++it)
          acc += it.value() * in[it.col()];
        out[i] = cost[i] + discount * acc;
      }
    });
  };
  return fixed_point(size, discount, warm, options, stats,
                     static_cast<std::uint64_t>(trans.nonZeros()), sweep,
                     "policy evaluation did not converge");
}

CrossValue evaluate(const Pomdp& model, const PolicyGraph& graph, const SolverOptions& options) {
  const auto chain = build_chain(model, graph);
  CrossValue result;
  result.values =
      solve_linear(chain.trans_bar, chain.cost_bar, model.discount(), nullptr, options, result.stats);
  result.criterion = initial_joint(model, graph).dot(result.values);
  return result;
}

CrossValue evaluate_direct(const Pomdp& model, const PolicyGraph& graph) {
  const auto chain = build_chain(model, graph);
  const Index size = static_cast<Index>(chain.cost_bar.size());
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(size, size);
  system -= model.discount() * Eigen::MatrixXd(chain.trans_bar);
  CrossValue result;
  result.values = system.partialPivLu().solve(chain.cost_bar);
  result.criterion = initial_joint(model, graph).dot(result.values);
  result.stats.backup_ops = static_cast<std::uint64_t>(size) * size * size;
  return result;
}

Scalar evaluate_criterion(const Pomdp& model, const DeterministicPolicy& policy,
                          const SolverOptions& options) {
  const Index S = model.num_states();
  const Index N = policy.num_nodes();
  if (policy.num_observations() != model.num_observations() ||
      policy.num_actions != model.num_actions())
    throw std::invalid_argument("policy dimensions do not match the POMDP");
  const ObservationSupport support(model);

  std::vector<Index> compact(static_cast<std::size_t>(N) * S, -1);
  std::vector<Index> order;  // compact index -> n*S + s
  auto visit = [&](Index n, Index s) {
    Index& slot = compact[static_cast<std::size_t>(n) * S + s];
    if (slot < 0) {
      slot = static_cast<Index>(order.size());
      order.push_back(n * S + s);
    }
    return slot;
  };

  std::vector<std::pair<Index, Scalar>> start;
  for (Index s = 0; s < S; ++s) {
    const Scalar p = model.initial_belief()[s];
    if (p == 0.0) continue;
    for (const auto& [o, b] : support.of(s)) start.emplace_back(visit(policy.init_of[o], s), p * b);
  }

  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  std::vector<Scalar> cost;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Index n = order[k] / S;
    const Index s = order[k] % S;
    const Index a = policy.action_of[n];
    cost.push_back(model.expected_reward(s, a));
    for (const auto& t : model.successors(s, a))
      for (const auto& [o, b] : support.of(t.next))
        triplets.emplace_back(static_cast<Index>(k), visit(policy.successor(n, o), t.next),
                              t.prob * b);
  }
  const Index size = static_cast<Index>(order.size());
  SparseMatrix trans(size, size);
  trans.setFromTriplets(triplets.begin(), triplets.end());
  const Vector c = Eigen::Map<const Vector>(cost.data(), size);
  SolveStats stats;
  const Vector values = solve_linear(trans, c, model.discount(), nullptr, options, stats);
  Scalar criterion = 0;
  for (const auto& [k, w] : start) criterion += w * values[k];
  return criterion;
}

// ---------------------------------------------------------------------------
// Constrained cross-product MDP

namespace {

/// Shared structure of the constrained Bellman operator: distinct successor
/// sets, per-node successor signatures, and node groups with identical
/// (signature, allowed actions).
struct OptimalStructure {
  std::vector<std::vector<Index>> sets;        // distinct allowed-successor sets
  std::vector<Index> set_of;                   // (n, o) -> set id
  std::vector<std::vector<Index>> signatures;  // signature id -> set id per o
  std::vector<Index> signature_of;             // n -> signature id
  struct Group {
    Index signature;
    std::vector<Index> actions;
  };
  std::vector<Group> groups;
  std::vector<Index> group_of;  // n -> group id

  explicit OptimalStructure(const ConstraintSet& c) {
    const Index N = c.num_nodes();
    const Index O = c.num_observations();
    std::map<std::vector<Index>, Index> set_ids;
    std::map<std::vector<Index>, Index> signature_ids;
    std::map<std::pair<Index, std::vector<Index>>, Index> group_ids;
    for (Index n = 0; n < N; ++n) {
      std::vector<Index> signature;
      for (Index o = 0; o < O; ++o) {
        const auto allowed = c.successors(n, o);
        std::vector<Index> key(allowed.begin(), allowed.end());
        auto [it, inserted] = set_ids.try_emplace(key, static_cast<Index>(sets.size()));
        if (inserted) sets.push_back(key);
        set_of.push_back(it->second);
        signature.push_back(it->second);
      }
      auto [sit, sinserted] =
          signature_ids.try_emplace(signature, static_cast<Index>(signatures.size()));
      if (sinserted) signatures.push_back(signature);
      signature_of.push_back(sit->second);

      const auto acts = c.actions(n);
      std::pair<Index, std::vector<Index>> gkey{sit->second, {acts.begin(), acts.end()}};
      auto [git, ginserted] = group_ids.try_emplace(gkey, static_cast<Index>(groups.size()));
      if (ginserted) groups.push_back({gkey.first, gkey.second});
      group_of.push_back(git->second);
    }
  }
};

}  // namespace

OptimalSolution solve_optimal(const CrossModel& cross, const Vector* warm_start,
                              const SolverOptions& options) {
  const Pomdp& model = cross.pomdp;
  const ConstraintSet& c = cross.constraints;
  const Index S = model.num_states();
  const Index N = c.num_nodes();
  const Index O = model.num_observations();
  const Index A = model.num_actions();
  if (c.num_observations() != O || c.num_actions() != A)
    throw std::invalid_argument("constraint set dimensions do not match the POMDP");
  const Scalar gamma = model.discount();

  const OptimalStructure st(c);
  const ObservationSupport support(model);
  Matrix reward(S, A);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a) reward(s, a) = model.expected_reward(s, a);

  const Index num_sets = static_cast<Index>(st.sets.size());
  const Index num_signatures = static_cast<Index>(st.signatures.size());
  const Index num_groups = static_cast<Index>(st.groups.size());
  Vector inner_max(static_cast<Eigen::Index>(num_sets) * S);
  Vector expected_next(static_cast<Eigen::Index>(num_signatures) * S);
  Vector group_value(static_cast<Eigen::Index>(num_groups) * S);

  std::uint64_t ops = 0;
  for (const auto& set : st.sets) ops += set.size() * S;
  ops += static_cast<std::uint64_t>(num_signatures) * support.entries.size();
  for (const auto& g : st.groups)
    for (Index a : g.actions)
      for (Index s = 0; s < S; ++s) ops += model.successors(s, a).size();

  auto sweep = [&](const Vector& in, Vector& out) {
    detail::parallel_for(S, options.threads, [&](long begin, long end) {
      for (long sp = begin; sp < end; ++sp) {
        for (Index k = 0; k < num_sets; ++k) {
          Scalar best = -std::numeric_limits<Scalar>::infinity();
          for (Index m : st.sets[k]) best = std::max(best, in[m * S + sp]);
          inner_max[k * S + sp] = best;
        }
        for (Index g = 0; g < num_signatures; ++g) {
          Scalar acc = 0;
          for (const auto& [o, b] : support.of(static_cast<Index>(sp)))
            acc += b * inner_max[st.signatures[g][o] * S + sp];
          expected_next[g * S + sp] = acc;
        }
      }
    });
    detail::parallel_for(S, options.threads, [&](long begin, long end) {
      for (long s = begin; s < end; ++s) {
        for (Index q = 0; q < num_groups; ++q) {
          const auto& g = st.groups[q];
          const Scalar* next = expected_next.data() + static_cast<std::size_t>(g.signature) * S;
          Scalar best = -std::numeric_limits<Scalar>::infinity();
          for (Index a : g.actions) {
            Scalar acc = 0;
            for (const auto& t : model.successors(static_cast<Index>(s), a)) acc += t.prob * next[t.next];
            best = std::max(best, reward(s, a) + gamma * acc);
          }
          group_value[q * S + s] = best;
        }
        for (Index n = 0; n < N; ++n) out[n * S + s] = group_value[st.group_of[n] * S + s];
      }
    });
  };

  OptimalSolution sol;
  const Index size = N * S;
  sol.value.values = fixed_point(size, gamma, warm_start, options, sol.value.stats, ops, sweep,
                                 "cross-product value iteration did not converge");
  const Vector& V = sol.value.values;

  // Greedy choices at the returned values; ties go to the lowest index.
  sol.best_successor.assign(static_cast<std::size_t>(N) * O * S, 0);
  for (Index n = 0; n < N; ++n) {
    for (Index o = 0; o < O; ++o) {
      const auto allowed = c.successors(n, o);
      for (Index sp = 0; sp < S; ++sp) {
        Index best = allowed.front();
        for (Index m : allowed)
          if (V[m * S + sp] > V[best * S + sp]) best = m;
        sol.best_successor[(static_cast<std::size_t>(n) * O + o) * S + sp] = best;
      }
    }
  }
  Vector next_value(static_cast<Eigen::Index>(N) * S);
  for (Index n = 0; n < N; ++n) {
    for (Index sp = 0; sp < S; ++sp) {
      Scalar acc = 0;
      for (const auto& [o, b] : support.of(sp))
        acc += b * V[sol.best_successor[(static_cast<std::size_t>(n) * O + o) * S + sp] * S + sp];
      next_value[n * S + sp] = acc;
    }
  }
  sol.best_action.assign(static_cast<std::size_t>(N) * S, 0);
  for (Index n = 0; n < N; ++n) {
    for (Index s = 0; s < S; ++s) {
      Index best = -1;
      Scalar best_q = -std::numeric_limits<Scalar>::infinity();
      for (Index a : c.actions(n)) {
        Scalar acc = 0;
        for (const auto& t : model.successors(s, a)) acc += t.prob * next_value[n * S + t.next];
        const Scalar q = reward(s, a) + gamma * acc;
        if (best < 0 || q > best_q) {
          best = a;
          best_q = q;
        }
      }
      sol.best_action[static_cast<std::size_t>(n) * S + s] = best;
    }
  }
  sol.best_initial.assign(static_cast<std::size_t>(O) * S, 0);
  Scalar criterion = 0;
  for (Index s = 0; s < S; ++s) {
    for (Index o = 0; o < O; ++o) {
      const auto allowed = c.initial(o);
      Index best = allowed.front();
      for (Index m : allowed)
        if (V[m * S + s] > V[best * S + s]) best = m;
      sol.best_initial[static_cast<std::size_t>(o) * S + s] = best;
      criterion += model.initial_belief()[s] * model.obs(s, o) * V[best * S + s];
    }
  }
  sol.value.criterion = criterion;
  return sol;
}

Vector solve_underlying_mdp(const Pomdp& model, const SolverOptions& options) {
  const Index S = model.num_states();
  const Index A = model.num_actions();
  const Scalar gamma = model.discount();
  auto sweep = [&](const Vector& in, Vector& out) {
    detail::parallel_for(S, options.threads, [&](long begin, long end) {
      for (long s = begin; s < end; ++s) {
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (Index a = 0; a < A; ++a) {
          Scalar acc = 0;
          for (const auto& t : model.successors(static_cast<Index>(s), a))
            acc += t.prob * (t.reward + gamma * in[t.next]);
          best = std::max(best, acc);
        }
        out[s] = best;
      }
    });
  };
  SolveStats stats;
  return fixed_point(S, gamma, nullptr, options, stats, model.num_transitions(), sweep,
                     "value iteration did not converge");
}

}  // namespace pgraph
