#include "pgraph/io.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace pgraph {

Pomdp generate_load_unload(const LoadUnloadSpec& spec) {
  const Index L = spec.num_locations;
  if (L < 2) throw std::invalid_argument("load/unload needs at least 2 locations");
  if (!(spec.discount >= 0.0 && spec.discount < 1.0))
    throw std::invalid_argument("discount must lie in [0, 1)");

  // State of (location, loaded). The Unload end is always unloaded and the
  // Load end always loaded; the middle cells carry both flags.
  const Index S = 2 * (L - 1);
  auto state_of = [L](Index loc, bool loaded) -> Index {
    if (loc == 0) return 0;
    if (loc == L - 1) return 2 * L - 3;
    return 1 + 2 * (loc - 1) + (loaded ? 1 : 0);
  };

  Names names;
  names.actions = {"left", "right"};
  names.observations = {"unload", "load", "middle"};
  names.states.resize(S);
  std::vector<std::pair<Index, bool>> cells(S);
  for (Index loc = 0; loc < L; ++loc) {
    for (bool loaded : {false, true}) {
      if ((loc == 0 && loaded) || (loc == L - 1 && !loaded)) continue;
      const Index s = state_of(loc, loaded);
      cells[s] = {loc, loaded};
      if (loc == 0) names.states[s] = "U";
      else if (loc == L - 1) names.states[s] = "L";
      else names.states[s] = "m" + std::to_string(loc) + (loaded ? "l" : "u");
    }
  }

  Matrix obs = Matrix::Zero(S, 3);
  std::vector<std::vector<Transition>> rows(static_cast<std::size_t>(S) * 2);
  for (Index s = 0; s < S; ++s) {
    const auto [loc, loaded] = cells[s];
    obs(s, loc == 0 ? 0 : (loc == L - 1 ? 1 : 2)) = 1.0;
    for (Index a = 0; a < 2; ++a) {
      const Index to = std::clamp<Index>(loc + (a == 0 ? -1 : 1), 0, L - 1);
      const bool delivered = to == 0 && loaded;
      const bool now_loaded = to == L - 1 ? true : (to == 0 ? false : loaded);
      rows[static_cast<std::size_t>(s) * 2 + a].push_back(
          {state_of(to, now_loaded), 1.0, delivered ? 1.0 : 0.0});
    }
  }
  Vector start = Vector::Zero(S);
  start[state_of(0, false)] = 1.0;
  return Pomdp(S, 2, 3, std::move(obs), std::move(rows), spec.discount, std::move(start),
               std::move(names));
}

namespace {

enum Direction { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };
constexpr std::array<int, 4> kDx = {0, 1, 0, -1};
constexpr std::array<int, 4> kDy = {-1, 0, 1, 0};

// Wall bitmask (bit d set = wall on side d) of every signature but the goal.
constexpr std::array<unsigned, 8> kWallSignatures = {
    (1u << kNorth) | (1u << kSouth) | (1u << kWest),  // dead end, open east
    (1u << kEast),                                    // junction, open north/south/west
    (1u << kEast) | (1u << kWest),                    // vertical corridor
    (1u << kNorth) | (1u << kWest),                   // north-west corner
    (1u << kNorth) | (1u << kSouth),                  // horizontal corridor
    (1u << kNorth) | (1u << kEast),                   // north-east corner
    (1u << kSouth) | (1u << kWest),                   // south-west corner
    (1u << kSouth) | (1u << kEast),                   // south-east corner
};
constexpr Index kGoalSignature = 8;

// Top-bottom reflection; maps the eight wall signatures onto themselves.
unsigned mirror_walls(unsigned walls) {
  unsigned out = walls & ((1u << kEast) | (1u << kWest));
  if (walls & (1u << kNorth)) out |= 1u << kSouth;
  if (walls & (1u << kSouth)) out |= 1u << kNorth;
  return out;
}

}  // namespace

const std::vector<std::string>& maze_observation_names() {
  static const std::vector<std::string> names = {
      "dead_end", "junction", "vertical", "corner_nw", "horizontal",
      "corner_ne", "corner_sw", "corner_se", "goal"};
  return names;
}

Pomdp generate_maze(const MazeSpec& spec) {
  const Index L = spec.corridor_length;
  if (L < 1) throw std::invalid_argument("maze corridor length must be at least 1");
  if (!(spec.slip_probability >= 0.0 && spec.slip_probability < 1.0))
    throw std::invalid_argument("slip probability must lie in [0, 1)");
  if (!(spec.discount >= 0.0 && spec.discount < 1.0))
    throw std::invalid_argument("discount must lie in [0, 1)");
  const bool mirrored = (spec.layout_seed & 1u) != 0;
  const int height = 2 * L + 1;

  // Cells in canonical orientation: start stub at x = -1, ring at x = 0..2.
  std::vector<std::pair<int, int>> cells;
  cells.emplace_back(-1, L);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x <= 2; ++x)
      if (x != 1 || y == 0 || y == height - 1) cells.emplace_back(x, y);
  std::map<std::pair<int, int>, Index> index;
  for (Index i = 0; i < static_cast<Index>(cells.size()); ++i) index[cells[i]] = i;
  const Index S = static_cast<Index>(cells.size());
  const Index goal = index.at({2, L});

  // A mirrored layout swaps north and south; moving north in the mirrored maze
  // is moving south in canonical coordinates.
  auto canonical_dir = [mirrored](Index a) -> Index {
    if (!mirrored) return a;
    return a == kNorth ? kSouth : (a == kSouth ? kNorth : a);
  };

  Names names;
  names.actions = {"north", "east", "south", "west"};
  names.observations = maze_observation_names();
  Matrix obs = Matrix::Zero(S, 9);
  std::vector<std::vector<Transition>> rows(static_cast<std::size_t>(S) * 4);
  for (Index s = 0; s < S; ++s) {
    const auto [x, y] = cells[s];
    if (s == 0) names.states.push_back("entry");
    else if (s == goal) names.states.push_back("goal");
    else names.states.push_back("c" + std::to_string(x) + "_" + std::to_string(mirrored ? height - 1 - y : y));
    unsigned walls = 0;
    for (int d = 0; d < 4; ++d)
      if (!index.contains({x + kDx[d], y + kDy[d]})) walls |= 1u << d;
    if (mirrored) walls = mirror_walls(walls);

    if (s == goal) {
      obs(s, kGoalSignature) = 1.0;
    } else {
      Index sig = -1;
      for (Index k = 0; k < 8; ++k)
        if (kWallSignatures[k] == walls) sig = k;
      if (sig < 0) throw std::logic_error("maze cell with an unexpected wall pattern");
      obs(s, sig) = 1.0;
    }

    for (Index a = 0; a < 4; ++a) {
      auto& row = rows[static_cast<std::size_t>(s) * 4 + a];
      if (s == goal) {
        row.push_back({s, 1.0, 0.0});
        continue;
      }
      const Index d = canonical_dir(a);
      const auto it = index.find({x + kDx[d], y + kDy[d]});
      if (it == index.end() || spec.slip_probability == 0.0) {
        const Index to = it == index.end() ? s : it->second;
        row.push_back({to, 1.0, to == goal ? 1.0 : 0.0});
      } else {
        row.push_back({s, spec.slip_probability, 0.0});
        row.push_back({it->second, 1.0 - spec.slip_probability, it->second == goal ? 1.0 : 0.0});
      }
    }
  }
  Vector start = Vector::Zero(S);
  start[0] = 1.0;
  return Pomdp(S, 4, 9, std::move(obs), std::move(rows), spec.discount, std::move(start),
               std::move(names));
}

}  // namespace pgraph
