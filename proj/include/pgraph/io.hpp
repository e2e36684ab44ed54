#pragma once

#include "pgraph/model.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace pgraph {

// ---------------------------------------------------------------------------
// .pomdp files
//
// Supported subset of the Cassandra format: `discount:`, `values: reward`,
// `states:`, `actions:`, `observations:` (count or name list), `start:`
// (probability list, `uniform`, or a single state), and `T:`, `O:`, `R:`
// entries in their per-entry, per-row and per-matrix forms with `*`
// wildcards and the `uniform` / `identity` keywords. `#` starts a comment.
//
// Observations must not depend on the action: `O: a : s' : o` has to agree
// across actions. Rewards R(a, s, s', o) are folded into R(s, a, s') by
// taking their expectation under B(s', ·).

Pomdp parse_pomdp(std::string_view text);
Pomdp read_pomdp_file(const std::string& path);

/// Writes every probability and reward with 17 significant digits, so that
/// parse_pomdp(write_pomdp(m)) reproduces m.
std::string write_pomdp(const Pomdp& model);

// ---------------------------------------------------------------------------
// Policy-graph files
//
//   pgraph 1
//   nodes <|N|>
//   observations <|O|>
//   actions <|A|>
//   deterministic <yes|no>
//   psi            |N| lines
//   eta0           |O| lines
//   eta            |N||O| lines, row n*|O| + o
//
// In a deterministic file every line is one integer choice; otherwise it is a
// probability row with 17 significant digits. `#` starts a comment.

std::string write_policy_graph(const PolicyGraph& graph);
PolicyGraph read_policy_graph(std::string_view text);

/// Constraint files: each line restricts one allowed set, anything not
/// mentioned stays unrestricted.
///
///   actions <n> : <a> <a> ...
///   successors <n> <o> : <n'> ...
///   initial <o> : <n> ...
ConstraintSet read_constraints(std::string_view text, Index num_nodes, Index num_observations,
                               Index num_actions);

// ---------------------------------------------------------------------------
// Benchmark families

struct LoadUnloadSpec {
  Index num_locations = 8;
  Scalar discount = 0.996;
};

/**
 * A corridor of `num_locations` cells with Unload at the left end and Load at
 * the right end. Actions: 0 = left, 1 = right (clamped at the ends). Entering
 * Load loads the agent; entering Unload while loaded pays 1 and unloads it.
 * Observations: 0 = at Unload, 1 = at Load, 2 = in between. The end cells
 * carry a forced load flag, so |S| = 2 (num_locations - 1).
 */
Pomdp generate_load_unload(const LoadUnloadSpec& spec);

struct MazeSpec {
  Index corridor_length = 1;
  Scalar slip_probability = 0.2;
  Scalar discount = 0.99;
  std::uint64_t layout_seed = 0;
};

/**
 * A ring maze: a rectangle of corridors three cells wide and
 * 2 * corridor_length + 1 cells tall, plus a dead-end start cell attached to
 * the middle of the left side. The goal is the middle of the right side, so
 * going round the top or the bottom are the only two shortest paths.
 * |S| = 4 * corridor_length + 5.
 *
 * Actions 0..3 = north, east, south, west. A move succeeds with probability
 * 1 - slip and otherwise leaves the agent in place; moving into a wall also
 * stays. Entering the goal pays 1; the goal is absorbing.
 *
 * The agent observes the wall pattern of its cell. The family uses nine
 * signatures: eight wall patterns plus a distinct goal signal.
 *
 * `layout_seed` mirrors the maze vertically when odd (swapping which path
 * runs along the top); the two mirror images have the same values.
 */
Pomdp generate_maze(const MazeSpec& spec);

/// Wall-signature names, indexed like the maze observations.
const std::vector<std::string>& maze_observation_names();

}  // namespace pgraph
