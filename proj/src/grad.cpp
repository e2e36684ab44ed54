#include "pgraph/grad.hpp"

#include "parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace pgraph {

namespace {

/// Shared pieces of both gradient methods.
struct Setup {
  const Pomdp& model;
  const PolicyGraph& graph;
  ConstraintSet constraints;
  Index N, S, O, A;
  ChainMatrices chain;
  Vector joint;  // π̄⁰
  Matrix reward;  // r(s, a)

  Setup(const Pomdp& m, const PolicyGraph& g, const ConstraintSet* c)
      : model(m),
        graph(g),
        constraints(c ? *c : ConstraintSet::unconstrained(g.num_nodes(), m.num_observations(), m.num_actions())),
        N(g.num_nodes()),
        S(m.num_states()),
        O(m.num_observations()),
        A(m.num_actions()),
        chain(build_chain(m, g)),
        joint(initial_joint(m, g)),
        reward(S, A) {
    if (constraints.num_nodes() != N) throw std::invalid_argument("constraint set has the wrong node count");
    for (Index s = 0; s < S; ++s)
      for (Index a = 0; a < A; ++a) reward(s, a) = m.expected_reward(s, a);
  }

  Index size() const { return N * S; }

  /// Q_n(s') = Σ_o B(s',o) Σ_{n'} η(n,o,n') V(n',s').
  Vector next_value(Index n, const Vector& V) const {
    Vector q = Vector::Zero(S);
    for (Index sp = 0; sp < S; ++sp)
      for (Index o = 0; o < O; ++o) {
        const Scalar b = model.obs(sp, o);
        if (b == 0.0) continue;
        Scalar acc = 0;
        for (Index m = 0; m < N; ++m) acc += graph.eta(n, o, m) * V[m * S + sp];
        q[sp] += b * acc;
      }
    return q;
  }

  /// ∂C̄ + γ ∂T̄ V for ψ(n,a), on the rows of node n.
  Vector psi_term(Index a, const Vector& q) const {
    Vector out(S);
    for (Index s = 0; s < S; ++s) {
      Scalar acc = 0;
      for (const auto& t : model.successors(s, a)) acc += t.prob * q[t.next];
      out[s] = reward(s, a) + model.discount() * acc;
    }
    return out;
  }

  /// γ ∂T̄ V for η(n,o,n'), on the rows of node n.
  Vector eta_term(Index n, Index o, Index next, const Vector& V) const {
    Vector out = Vector::Zero(S);
    for (Index s = 0; s < S; ++s)
      for (Index a = 0; a < A; ++a) {
        const Scalar psi = graph.psi(n, a);
        if (psi == 0.0) continue;
        Scalar acc = 0;
        for (const auto& t : model.successors(s, a)) acc += t.prob * model.obs(t.next, o) * V[next * S + t.next];
        out[s] += psi * acc;
      }
    return model.discount() * out;
  }

  Scalar eta0_entry(Index o, Index n, const Vector& V) const {
    Scalar acc = 0;
    for (Index s = 0; s < S; ++s) acc += model.initial_belief()[s] * model.obs(s, o) * V[n * S + s];
    return acc;
  }

  GradientVector zeros() const {
    return {Matrix::Zero(N, A), Matrix::Zero(static_cast<Eigen::Index>(N) * O, N), Matrix::Zero(O, N)};
  }

  void fill_eta0(GradientVector& g, const Vector& V) const {
    for (Index o = 0; o < O; ++o)
      for (Index n : constraints.initial(o)) g.d_eta0(o, n) = eta0_entry(o, n, V);
  }
};

/// (I - γT̄)⁻¹ by the matrix iteration W <- I + γ T̄ W.
Matrix fundamental_by_iteration(const SparseMatrix& trans, Scalar gamma, const SolverOptions& options,
                                std::uint64_t& ops) {
  const Index size = static_cast<Index>(trans.rows());
  Matrix W = Matrix::Identity(size, size);
  Matrix next(size, size);
  const int cap = options.max_sweeps > 0 ? options.max_sweeps : default_sweep_cap(gamma);
  const Scalar scale = gamma / (1.0 - gamma);
  Scalar change = 0;
  for (int k = 1; k <= cap; ++k) {
    next = gamma * (trans * W);
    next.diagonal().array() += 1.0;
    ops += static_cast<std::uint64_t>(trans.nonZeros()) * size;
    change = (next - W).cwiseAbs().rowwise().sum().maxCoeff();
    W.swap(next);
    if (scale * change <= options.tolerance) return W;
  }
  throw ConvergenceError("fundamental matrix iteration did not converge", change, cap);
}

Index count_parameters(const ConstraintSet& c) {
  Index count = 0;
  for (Index n = 0; n < c.num_nodes(); ++n) {
    if (c.actions(n).size() > 1) count += static_cast<Index>(c.actions(n).size());
    for (Index o = 0; o < c.num_observations(); ++o)
      if (c.successors(n, o).size() > 1) count += static_cast<Index>(c.successors(n, o).size());
  }
  for (Index o = 0; o < c.num_observations(); ++o)
    if (c.initial(o).size() > 1) count += static_cast<Index>(c.initial(o).size());
  return count;
}

}  // namespace

Scalar GradientVector::sup_norm() const {
  Scalar m = 0;
  if (d_psi.size()) m = std::max(m, d_psi.cwiseAbs().maxCoeff());
  if (d_eta.size()) m = std::max(m, d_eta.cwiseAbs().maxCoeff());
  if (d_eta0.size()) m = std::max(m, d_eta0.cwiseAbs().maxCoeff());
  return m;
}

GradientVector gradient_matrix(const Pomdp& model, const PolicyGraph& graph, const ConstraintSet* constraints,
                               InverseMethod method, const SolverOptions& options, GradientStats* stats) {
  const Setup st(model, graph, constraints);
  const Index size = st.size();
  const Scalar gamma = model.discount();
  GradientStats local;

  Matrix W;
  if (method == InverseMethod::Direct) {
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(size, size);
    system -= gamma * Eigen::MatrixXd(st.chain.trans_bar);
    W = system.partialPivLu().inverse();
    local.setup_ops = static_cast<std::uint64_t>(size) * size * size;
  } else {
    W = fundamental_by_iteration(st.chain.trans_bar, gamma, options, local.setup_ops);
  }
  const Vector V = W * st.chain.cost_bar;
  const RowVector u = st.joint.transpose() * W;
  local.setup_ops += 2 * static_cast<std::uint64_t>(size) * size;

  GradientVector g = st.zeros();
  for (Index n = 0; n < st.N; ++n) {
    const auto un = u.segment(static_cast<Eigen::Index>(n) * st.S, st.S);
    const Vector q = st.next_value(n, V);
    for (Index a : st.constraints.actions(n)) {
      g.d_psi(n, a) = un.dot(st.psi_term(a, q));
      local.parameter_ops += static_cast<std::uint64_t>(st.S);
      ++local.parameters;
    }
    for (Index o = 0; o < st.O; ++o)
      for (Index m : st.constraints.successors(n, o)) {
        g.d_eta(n * st.O + o, m) = un.dot(st.eta_term(n, o, m, V));
        local.parameter_ops += static_cast<std::uint64_t>(st.S);
        ++local.parameters;
      }
  }
  st.fill_eta0(g, V);
  if (stats) *stats = local;
  return g;
}

GradientVector gradient_vectorwise(const Pomdp& model, const PolicyGraph& graph, const ConstraintSet* constraints,
                                   const SolverOptions& options, GradientStats* stats) {
  const Setup st(model, graph, constraints);
  const Scalar gamma = model.discount();
  GradientStats local;
  SolveStats vstats;
  const Vector V = solve_linear(st.chain.trans_bar, st.chain.cost_bar, gamma, nullptr, options, vstats);
  local.setup_ops = vstats.backup_ops;

  struct Parameter {
    bool is_psi;
    Index node, observation, value;  // value = action or successor node
  };
  std::vector<Parameter> params;
  for (Index n = 0; n < st.N; ++n) {
    for (Index a : st.constraints.actions(n)) params.push_back({true, n, -1, a});
    for (Index o = 0; o < st.O; ++o)
      for (Index m : st.constraints.successors(n, o)) params.push_back({false, n, o, m});
  }
  std::vector<Vector> next_values(st.N);
  for (Index n = 0; n < st.N; ++n) next_values[n] = st.next_value(n, V);

  std::vector<Scalar> result(params.size());
  std::vector<std::uint64_t> ops(params.size());
  SolverOptions inner = options;
  inner.threads = 1;
  detail::parallel_for(
      static_cast<long>(params.size()), options.threads,
      [&](long begin, long end) {
        for (long i = begin; i < end; ++i) {
          const auto& p = params[i];
          Vector v1 = Vector::Zero(st.size());
          v1.segment(static_cast<Eigen::Index>(p.node) * st.S, st.S) =
              p.is_psi ? st.psi_term(p.value, next_values[p.node]) : st.eta_term(p.node, p.observation, p.value, V);
          SolveStats s2;
          const Vector v2 = solve_linear(st.chain.trans_bar, v1, gamma, nullptr, inner, s2);
          result[i] = st.joint.dot(v2);
          ops[i] = s2.backup_ops + static_cast<std::uint64_t>(st.S);
        }
      },
      1);

  GradientVector g = st.zeros();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.is_psi) g.d_psi(p.node, p.value) = result[i];
    else g.d_eta(p.node * st.O + p.observation, p.value) = result[i];
    local.parameter_ops += ops[i];
  }
  local.parameters = static_cast<int>(params.size());
  st.fill_eta0(g, V);
  if (stats) *stats = local;
  return g;
}

GradientVector compute_gradient(const Pomdp& model, const PolicyGraph& graph, const ConstraintSet& constraints,
                                GradientMethod method, const SolverOptions& options, GradientStats* stats) {
  const Index size = graph.num_nodes() * model.num_states();
  if (method == GradientMethod::Auto)
    method = count_parameters(constraints) > size ? GradientMethod::Matrix : GradientMethod::Vectorwise;
  if (method == GradientMethod::Vectorwise) return gradient_vectorwise(model, graph, &constraints, options, stats);
  return gradient_matrix(model, graph, &constraints,
                         size <= 2000 ? InverseMethod::Direct : InverseMethod::Iteration, options, stats);
}

// ---------------------------------------------------------------------------
// Projection

namespace {

/// Moves one distribution row along its projected gradient. `free` lists the
/// allowed coordinates; everything else is held at 0.
bool step_row(Eigen::Ref<RowVector> x, const RowVector& g, std::span<const Index> free, Scalar step,
              bool walk_faces) {
  const std::size_t k = free.size();
  if (k < 2 || step <= 0) return false;
  std::vector<Scalar> xs(k), gs(k), d(k);
  for (std::size_t i = 0; i < k; ++i) {
    xs[i] = x[free[i]];
    gs[i] = g[free[i]];
  }

  bool moved = false;
  Scalar budget = step;
  for (std::size_t round = 0; round < k && budget > 0; ++round) {
    // Tangent-cone projection: coordinates at 0 join only if they gain mass.
    std::vector<std::size_t> active, at_zero;
    for (std::size_t i = 0; i < k; ++i) (xs[i] > 0 ? active : at_zero).push_back(i);
    std::sort(at_zero.begin(), at_zero.end(), [&](std::size_t a, std::size_t b) { return gs[a] > gs[b]; });
    Scalar sum = 0;
    for (auto i : active) sum += gs[i];
    Scalar tau = sum / static_cast<Scalar>(active.size());
    for (auto i : at_zero) {
      if (gs[i] <= tau) break;
      active.push_back(i);
      sum += gs[i];
      tau = sum / static_cast<Scalar>(active.size());
    }
    std::fill(d.begin(), d.end(), 0.0);
    Scalar norm = 0;
    for (auto i : active) {
      d[i] = gs[i] - tau;
      norm = std::max(norm, std::abs(d[i]));
    }
    if (norm <= 1e-15) break;

    // Longest move before a coordinate hits 0.
    Scalar reach = budget;
    std::size_t hit = k;
    for (std::size_t i = 0; i < k; ++i)
      if (d[i] < 0 && xs[i] / -d[i] < reach) {
        reach = xs[i] / -d[i];
        hit = i;
      }
    for (std::size_t i = 0; i < k; ++i) xs[i] = std::max(0.0, xs[i] + reach * d[i]);
    if (hit < k) xs[hit] = 0;
    moved = true;
    budget -= reach;
    if (!walk_faces) break;
  }
  if (!moved) return false;

  Scalar total = 0;
  for (auto& v : xs) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (Eigen::Index c = 0; c < x.size(); ++c) x[c] = 0;
  for (std::size_t i = 0; i < k; ++i) x[free[i]] = xs[i] / total;
  return true;
}

}  // namespace

PolicyGraph project_and_step(const PolicyGraph& graph, const GradientVector& grad, Scalar step,
                             const ConstraintSet& constraints, bool walk_faces) {
  PolicyGraph out = graph;
  const Index N = graph.num_nodes();
  const Index O = graph.num_observations();
  for (Index n = 0; n < N; ++n) {
    step_row(out.action_dist.row(n), grad.d_psi.row(n), constraints.actions(n), step, walk_faces);
    for (Index o = 0; o < O; ++o) {
      const Index r = n * O + o;
      step_row(out.node_trans.row(r), grad.d_eta.row(r), constraints.successors(n, o), step, walk_faces);
    }
  }
  for (Index o = 0; o < O; ++o)
    step_row(out.initial_dist.row(o), grad.d_eta0.row(o), constraints.initial(o), step, walk_faces);
  return out;
}

// ---------------------------------------------------------------------------
// Ascent

namespace {

PolicyGraph random_interior(const ConstraintSet& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&](Eigen::Ref<RowVector> row, std::span<const Index> allowed) {
    row.setZero();
    Scalar total = 0;
    for (Index i : allowed) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      row[i] = -std::log1p(-u) + 1e-3;
      total += row[i];
    }
    row /= total;
  };
  PolicyGraph g(c.num_nodes(), c.num_observations(), c.num_actions());
  for (Index n = 0; n < c.num_nodes(); ++n) {
    draw(g.action_dist.row(n), c.actions(n));
    for (Index o = 0; o < c.num_observations(); ++o)
      draw(g.node_trans.row(n * c.num_observations() + o), c.successors(n, o));
  }
  for (Index o = 0; o < c.num_observations(); ++o) draw(g.initial_dist.row(o), c.initial(o));
  return g;
}

}  // namespace

AscentResult gradient_ascent(const Pomdp& model, const ConstraintSet& constraints, const AscentConfig& config,
                             const PolicyGraph* init) {
  if (!(config.step_size > 0) || config.max_iterations <= 0 || !(config.target_fraction > 0) ||
      config.target_fraction > 1 || config.patience <= 0)
    throw std::invalid_argument("invalid ascent configuration");
  const ConstraintSet effective = config.free_start ? constraints : constraints.with_fixed_start(0);

  PolicyGraph graph = init ? *init
                           : (config.random_init ? random_interior(effective, config.seed) : uniform_graph(effective));
  Scalar value = evaluate(model, graph, config.solver).criterion;
  const Scalar noise = std::max(config.improvement_tolerance, 10 * config.solver.tolerance);

  AscentResult result;
  result.best_graph = graph;
  result.best_value = value;
  Scalar beta = config.step_size;
  auto reached = [&] {
    return config.reference && result.best_value >= config.target_fraction * *config.reference;
  };
  result.history.push_back({0, value, beta, 0.0});
  if (reached()) {
    result.reached_target = true;
    return result;
  }

  for (int it = 1; it <= config.max_iterations; ++it) {
    const auto grad = compute_gradient(model, graph, effective, config.method, config.solver);
    PolicyGraph candidate = project_and_step(graph, grad, beta, effective, config.walk_faces);
    if (candidate == graph) break;  // stationary
    Scalar cv = evaluate(model, candidate, config.solver).criterion;
    int halvings = 0;
    while (cv < value - noise && halvings < 40) {
      beta /= 2;
      ++halvings;
      candidate = project_and_step(graph, grad, beta, effective, config.walk_faces);
      cv = evaluate(model, candidate, config.solver).criterion;
    }
    result.step_halvings += halvings;
    if (cv < value - noise) break;
    graph = std::move(candidate);
    value = cv;
    result.history.push_back({it, value, beta, grad.sup_norm()});
    if (value > result.best_value) {
      result.best_value = value;
      result.best_graph = graph;
    }
    if (reached()) {
      result.reached_target = true;
      break;
    }
    if (!config.reference && it >= config.patience) {
      const Scalar before = result.history[result.history.size() - 1 - config.patience].criterion;
      if (value - before < config.improvement_tolerance * std::max<Scalar>(1, std::abs(value))) break;
    }
  }
  return result;
}

std::string history_csv(const std::vector<AscentStep>& history) {
  std::string out = "iteration,criterion,step_size,gradient_norm\n";
  char buf[160];
  for (const auto& h : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", h.iteration, h.criterion, h.step_size,
                  h.gradient_norm);
    out += buf;
  }
  return out;
}

}  // namespace pgraph
