#pragma once

// Random instances and brute-force oracles shared by the test binaries. The
// oracles are written straight from the definitions with dense loops and do
// not call into the solver code they check.

#include "pgraph/model.hpp"

#include <Eigen/LU>

#include <functional>
#include <random>

namespace pgraph::test {

inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline Index pick(std::mt19937_64& rng, Index n) {
  return std::min<Index>(n - 1, static_cast<Index>(uniform(rng) * n));
}

/// Dirichlet(1) draw over `k` entries.
inline std::vector<double> random_distribution(std::mt19937_64& rng, Index k) {
  std::vector<double> p(k);
  double total = 0;
  for (auto& v : p) {
    v = -std::log1p(-uniform(rng)) + 1e-3;
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

/// Random model; each (s, a) row has up to `branching` successors and every
/// state emits up to two observations.
inline Pomdp random_pomdp(std::mt19937_64& rng, Index S, Index A, Index O, Scalar gamma, Index branching = 3) {
  Matrix obs = Matrix::Zero(S, O);
  for (Index s = 0; s < S; ++s) {
    const Index k = std::min<Index>(O, 1 + pick(rng, 2));
    const auto p = random_distribution(rng, k);
    for (Index i = 0; i < k; ++i) obs(s, (s + i) % O) += p[i];
  }
  std::vector<std::vector<Transition>> rows(static_cast<std::size_t>(S) * A);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a) {
      const Index k = 1 + pick(rng, std::min(S, branching));
      std::vector<Index> targets(S);
      for (Index i = 0; i < S; ++i) targets[i] = i;
      std::shuffle(targets.begin(), targets.end(), rng);
      const auto p = random_distribution(rng, k);
      for (Index i = 0; i < k; ++i)
        rows[static_cast<std::size_t>(s) * A + a].push_back({targets[i], p[i], 2 * uniform(rng) - 1});
    }
  const auto start = random_distribution(rng, S);
  Vector belief(S);
  for (Index s = 0; s < S; ++s) belief[s] = start[s];
  return Pomdp(S, A, O, std::move(obs), std::move(rows), gamma, belief);
}

inline PolicyGraph random_graph(std::mt19937_64& rng, Index N, Index O, Index A) {
  PolicyGraph g(N, O, A);
  auto fill = [&](Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const auto p = random_distribution(rng, static_cast<Index>(m.cols()));
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = p[c];
    }
  };
  fill(g.action_dist);
  fill(g.node_trans);
  fill(g.initial_dist);
  return g;
}

inline DeterministicPolicy random_policy(std::mt19937_64& rng, const ConstraintSet& c) {
  DeterministicPolicy p;
  p.num_actions = c.num_actions();
  for (Index n = 0; n < c.num_nodes(); ++n) p.action_of.push_back(c.actions(n)[pick(rng, c.actions(n).size())]);
  for (Index n = 0; n < c.num_nodes(); ++n)
    for (Index o = 0; o < c.num_observations(); ++o)
      p.succ_of.push_back(c.successors(n, o)[pick(rng, c.successors(n, o).size())]);
  for (Index o = 0; o < c.num_observations(); ++o) p.init_of.push_back(c.initial(o)[pick(rng, c.initial(o).size())]);
  return p;
}

/// Criterion by a dense solve of V = C + γ T V over N x S, both built from the
/// element-wise definitions.
inline Scalar oracle_criterion(const Pomdp& m, const PolicyGraph& g, Vector* values = nullptr) {
  const Index S = m.num_states(), A = m.num_actions(), O = m.num_observations(), N = g.num_nodes();
  const Index size = N * S;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd C = Eigen::VectorXd::Zero(size);
  for (Index n = 0; n < N; ++n)
    for (Index s = 0; s < S; ++s)
      for (Index a = 0; a < A; ++a)
        for (Index sp = 0; sp < S; ++sp) {
          const double p = g.psi(n, a) * m.trans(s, a, sp);
          C[n * S + s] += p * m.reward(s, a, sp);
          for (Index o = 0; o < O; ++o)
            for (Index np = 0; np < N; ++np) T(n * S + s, np * S + sp) += p * m.obs(sp, o) * g.eta(n, o, np);
        }
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(size, size) - m.discount() * T;
  const Eigen::VectorXd V = system.fullPivLu().solve(C);
  if (values) *values = V;
  double e = 0;
  for (Index s = 0; s < S; ++s)
    for (Index o = 0; o < O; ++o)
      for (Index n = 0; n < N; ++n) e += m.initial_belief()[s] * m.obs(s, o) * g.eta0(o, n) * V[n * S + s];
  return e;
}

/// Calls visit(policy) for every deterministic policy allowed by `c`.
inline void for_each_policy(const ConstraintSet& c, const std::function<void(const DeterministicPolicy&)>& visit) {
  const Index N = c.num_nodes(), O = c.num_observations();
  std::vector<std::vector<Index>> lists;
  for (Index n = 0; n < N; ++n) lists.emplace_back(c.actions(n).begin(), c.actions(n).end());
  for (Index o = 0; o < O; ++o) lists.emplace_back(c.initial(o).begin(), c.initial(o).end());
  for (Index n = 0; n < N; ++n)
    for (Index o = 0; o < O; ++o) lists.emplace_back(c.successors(n, o).begin(), c.successors(n, o).end());
  std::vector<std::size_t> at(lists.size(), 0);
  DeterministicPolicy p;
  p.num_actions = c.num_actions();
  p.action_of.resize(N);
  p.init_of.resize(O);
  p.succ_of.resize(static_cast<std::size_t>(N) * O);
  while (true) {
    for (Index n = 0; n < N; ++n) p.action_of[n] = lists[n][at[n]];
    for (Index o = 0; o < O; ++o) p.init_of[o] = lists[N + o][at[N + o]];
    for (std::size_t i = 0; i < p.succ_of.size(); ++i) p.succ_of[i] = lists[N + O + i][at[N + O + i]];
    visit(p);
    std::size_t k = 0;
    while (k < lists.size() && ++at[k] == lists[k].size()) at[k++] = 0;
    if (k == lists.size()) return;
  }
}

/// Brute-force maximum over every deterministic policy under `c`.
inline Scalar oracle_best(const Pomdp& m, const ConstraintSet& c, std::uint64_t* count = nullptr) {
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  std::uint64_t visited = 0;
  for_each_policy(c, [&](const DeterministicPolicy& p) {
    best = std::max(best, oracle_criterion(m, as_stochastic(p)));
    ++visited;
  });
  if (count) *count = visited;
  return best;
}

/// One state, `A` actions with reward rewards[a] per step, one observation.
inline Pomdp single_state(std::vector<Scalar> rewards, Scalar gamma) {
  const Index A = static_cast<Index>(rewards.size());
  std::vector<std::vector<Transition>> rows(A);
  for (Index a = 0; a < A; ++a) rows[a] = {{0, 1.0, rewards[a]}};
  return Pomdp(1, A, 1, Matrix::Ones(1, 1), std::move(rows), gamma, Vector::Ones(1));
}

}  // namespace pgraph::test
