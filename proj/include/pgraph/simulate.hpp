#pragma once

#include "pgraph/model.hpp"

#include <cstdint>
#include <vector>

namespace pgraph {

struct SimulationResult {
  Scalar mean = 0;
  Scalar std_error = 0;
  std::uint64_t rollouts = 0;
  int horizon = 0;
};

/// Smallest horizon H with γ^H max|R| / (1-γ) below `precision`.
int default_horizon(const Pomdp& model, Scalar precision = 1e-6);

/// Monte-Carlo estimate of the criterion from truncated discounted returns.
/// Deterministic given the seed.
SimulationResult simulate(const Pomdp& model, const PolicyGraph& graph, std::uint64_t rollouts,
                          int horizon, std::uint64_t seed);

/// One sampled run: states[t], nodes[t], actions[t], rewards[t] for t < steps.
struct Trajectory {
  std::vector<Index> states;
  std::vector<Index> nodes;
  std::vector<Index> actions;
  std::vector<Scalar> rewards;
};

Trajectory sample_trajectory(const Pomdp& model, const PolicyGraph& graph, int steps, std::uint64_t seed);

}  // namespace pgraph
