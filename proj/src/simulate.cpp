#include "pgraph/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pgraph {

namespace {

class Sampler {
 public:
  Sampler(const Pomdp& model, const PolicyGraph& graph, std::uint64_t seed)
      : model_(model), graph_(graph), rng_(seed) {
    if (graph.num_actions() != model.num_actions() || graph.num_observations() != model.num_observations())
      throw std::invalid_argument("policy graph dimensions do not match the POMDP");
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  template <class Row>
  Index pick(const Row& row) {
    const double u = uniform();
    double acc = 0;
    Index last = 0;
    for (Eigen::Index i = 0; i < row.size(); ++i) {
      if (row[i] <= 0) continue;
      acc += row[i];
      last = static_cast<Index>(i);
      if (u < acc) return last;
    }
    return last;
  }

  Index initial_state() { return pick(model_.initial_belief()); }
  Index observe(Index s) { return pick(model_.obs().row(s)); }
  Index action(Index n) { return pick(graph_.action_dist.row(n)); }
  Index start_node(Index o) { return pick(graph_.initial_dist.row(o)); }
  Index next_node(Index n, Index o) { return pick(graph_.node_trans.row(graph_.trans_row(n, o))); }

  const Transition& step(Index s, Index a) {
    const auto succ = model_.successors(s, a);
    const double u = uniform();
    double acc = 0;
    for (const auto& t : succ) {
      acc += t.prob;
      if (u < acc) return t;
    }
    return succ.back();
  }

 private:
  const Pomdp& model_;
  const PolicyGraph& graph_;
  std::mt19937_64 rng_;
};

}  // namespace

int default_horizon(const Pomdp& model, Scalar precision) {
  const Scalar gamma = model.discount();
  Scalar rmax = 0;
  for (Index s = 0; s < model.num_states(); ++s)
    for (Index a = 0; a < model.num_actions(); ++a)
      for (const auto& t : model.successors(s, a)) rmax = std::max(rmax, std::abs(t.reward));
  if (gamma == 0.0 || rmax == 0.0) return 1;
  const Scalar h = std::log(precision * (1 - gamma) / rmax) / std::log(gamma);
  return std::max(1, static_cast<int>(std::ceil(h)));
}

SimulationResult simulate(const Pomdp& model, const PolicyGraph& graph, std::uint64_t rollouts, int horizon,
                          std::uint64_t seed) {
  if (rollouts == 0 || horizon <= 0) throw std::invalid_argument("rollouts and horizon must be positive");
  Sampler sampler(model, graph, seed);
  const Scalar gamma = model.discount();
  double mean = 0, m2 = 0;
  for (std::uint64_t k = 1; k <= rollouts; ++k) {
    Index s = sampler.initial_state();
    Index n = sampler.start_node(sampler.observe(s));
    double ret = 0, discount = 1;
    for (int t = 0; t < horizon; ++t) {
      const Index a = sampler.action(n);
      const auto& tr = sampler.step(s, a);
      ret += discount * tr.reward;
      discount *= gamma;
      s = tr.next;
      n = sampler.next_node(n, sampler.observe(s));
    }
    const double delta = ret - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (ret - mean);
  }
  SimulationResult r;
  r.mean = mean;
  r.rollouts = rollouts;
  r.horizon = horizon;
  r.std_error = rollouts > 1 ? std::sqrt(m2 / static_cast<double>(rollouts - 1) / static_cast<double>(rollouts)) : 0;
  return r;
}

Trajectory sample_trajectory(const Pomdp& model, const PolicyGraph& graph, int steps, std::uint64_t seed) {
  Sampler sampler(model, graph, seed);
  Trajectory tr;
  Index s = sampler.initial_state();
  Index n = sampler.start_node(sampler.observe(s));
  for (int t = 0; t < steps; ++t) {
    const Index a = sampler.action(n);
    const auto& step = sampler.step(s, a);
    tr.states.push_back(s);
    tr.nodes.push_back(n);
    tr.actions.push_back(a);
    tr.rewards.push_back(step.reward);
    s = step.next;
    n = sampler.next_node(n, sampler.observe(s));
  }
  return tr;
}

}  // namespace pgraph
