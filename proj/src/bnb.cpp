#include "pgraph/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <queue>
#include <random>

namespace pgraph {

namespace {

using Clock = std::chrono::steady_clock;

/// States from which no reachable transition carries a nonzero reward.
std::vector<bool> zero_value_states(const Pomdp& m) {
  const Index S = m.num_states();
  std::vector<std::vector<Index>> predecessors(S);
  std::vector<bool> live(S, false);
  std::vector<Index> stack;
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < m.num_actions(); ++a) {
      for (const auto& t : m.successors(s, a)) {
        predecessors[t.next].push_back(s);
        if (t.reward != 0.0 && !live[s]) {
          live[s] = true;
          stack.push_back(s);
        }
      }
    }
  }
  while (!stack.empty()) {
    const Index s = stack.back();
    stack.pop_back();
    for (Index p : predecessors[s])
      if (!live[p]) {
        live[p] = true;
        stack.push_back(p);
      }
  }
  std::vector<bool> zero(S);
  for (Index s = 0; s < S; ++s) zero[s] = !live[s];
  return zero;
}

/// States reachable from the support of the initial belief under any actions.
std::vector<bool> reachable_states(const Pomdp& m) {
  const Index S = m.num_states();
  std::vector<bool> seen(S, false);
  std::vector<Index> stack;
  for (Index s = 0; s < S; ++s)
    if (m.initial_belief()[s] != 0.0) {
      seen[s] = true;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const Index s = stack.back();
    stack.pop_back();
    for (Index a = 0; a < m.num_actions(); ++a)
      for (const auto& t : m.successors(s, a))
        if (!seen[t.next]) {
          seen[t.next] = true;
          stack.push_back(t.next);
        }
  }
  return seen;
}

/// Uniform draw in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

/// Discounted occupancy of the node-state pairs under a deterministic
/// cross-product policy, truncated once γ^k drops below 1e-4.
Vector occupancy(const Pomdp& m, Index N, const std::vector<Index>& action,
                 const std::vector<Index>& successor, const std::vector<Index>& initial) {
  const Index S = m.num_states();
  const Index O = m.num_observations();
  const Scalar gamma = m.discount();
  Vector d = Vector::Zero(static_cast<Eigen::Index>(N) * S);
  for (Index s = 0; s < S; ++s)
    for (Index o = 0; o < O; ++o)
      d[initial[static_cast<std::size_t>(o) * S + s] * S + s] += m.initial_belief()[s] * m.obs(s, o);
  Vector total = d;
  const int horizon =
      gamma == 0.0 ? 0 : static_cast<int>(std::min(2000.0, std::ceil(std::log(1e-4) / std::log(gamma))));
  Vector next(d.size());
  for (int k = 0; k < horizon; ++k) {
    next.setZero();
    for (Index n = 0; n < N; ++n) {
      for (Index s = 0; s < S; ++s) {
        const Scalar mass = d[n * S + s];
        if (mass == 0.0) continue;
        for (const auto& t : m.successors(s, action[static_cast<std::size_t>(n) * S + s]))
          for (Index o = 0; o < O; ++o) {
            const Scalar b = m.obs(t.next, o);
            if (b == 0.0) continue;
            const Index to = successor[(static_cast<std::size_t>(n) * O + o) * S + t.next];
            next[to * S + t.next] += gamma * mass * t.prob * b;
          }
      }
    }
    total += next;
    d.swap(next);
  }
  return total;
}

Index argmax_allowed(std::span<const Index> allowed, const auto& score) {
  Index best = allowed.front();
  Scalar best_score = score(best);
  for (Index v : allowed.subspan(1)) {
    const Scalar sc = score(v);
    if (sc > best_score) {
      best = v;
      best_score = sc;
    }
  }
  return best;
}

std::string trace_line(Index depth, Index slot, Index choice, Scalar ub, Scalar incumbent) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d\t%d\t%d\t%.12g\t%.12g", depth, slot, choice, ub, incumbent);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Search space

SearchSpace::SearchSpace(const Pomdp& model, const ConstraintSet& constraints)
    : model_(&model), constraints_(&constraints) {
  const Index N = constraints.num_nodes();
  const Index O = constraints.num_observations();
  if (O != model.num_observations() || constraints.num_actions() != model.num_actions())
    throw std::invalid_argument("constraint set dimensions do not match the POMDP");

  const auto zero = zero_value_states(model);
  const auto reach = reachable_states(model);
  std::vector<bool> emitted(O, false);  // observed in a reachable, non-zero-value state
  std::vector<bool> initial_mass(O, false);
  for (Index s = 0; s < model.num_states(); ++s) {
    if (zero[s]) continue;
    for (Index o = 0; o < O; ++o) {
      if (model.obs(s, o) == 0.0) continue;
      if (reach[s]) emitted[o] = true;
      if (model.initial_belief()[s] != 0.0) initial_mass[o] = true;
    }
  }

  for (Index n = 0; n < N; ++n) {
    slots_.push_back({SlotKind::Action, n, -1});
    relevant_.push_back(true);
  }
  for (Index o = 0; o < O; ++o) {
    slots_.push_back({SlotKind::Initial, -1, o});
    relevant_.push_back(initial_mass[o]);
  }
  for (Index n = 0; n < N; ++n)
    for (Index o = 0; o < O; ++o) {
      slots_.push_back({SlotKind::Successor, n, o});
      relevant_.push_back(emitted[o]);
    }

  interchangeable_.assign(N, false);
  for (Index n = 1; n < N; ++n) interchangeable_[n] = constraints.swapped(n - 1, n) == constraints;
}

std::span<const Index> SearchSpace::allowed(Index i) const {
  const Slot& s = slots_[i];
  switch (s.kind) {
    case SlotKind::Action: return constraints_->actions(s.node);
    case SlotKind::Initial: return constraints_->initial(s.observation);
    case SlotKind::Successor: return constraints_->successors(s.node, s.observation);
  }
  return {};
}

PartialPolicy PartialPolicy::root(const SearchSpace& space) {
  PartialPolicy p;
  p.choice.assign(space.num_slots(), kFree);
  return p;
}

PartialPolicy PartialPolicy::with_next(Index value) const {
  PartialPolicy child = *this;
  child.choice[depth] = value;
  ++child.depth;
  return child;
}

ConstraintSet restrict(const SearchSpace& space, const PartialPolicy& partial) {
  const ConstraintSet& c = space.constraints();
  const Index N = c.num_nodes();
  const Index O = c.num_observations();
  auto copy = [](std::span<const Index> s) { return std::vector<Index>(s.begin(), s.end()); };
  std::vector<std::vector<Index>> actions, successors, initial;
  for (Index n = 0; n < N; ++n) actions.push_back(copy(c.actions(n)));
  for (Index n = 0; n < N; ++n)
    for (Index o = 0; o < O; ++o) successors.push_back(copy(c.successors(n, o)));
  for (Index o = 0; o < O; ++o) initial.push_back(copy(c.initial(o)));

  for (Index i = 0; i < space.num_slots(); ++i) {
    const Index v = partial.choice[i];
    if (v == kFree) continue;
    const auto& slot = space.slot(i);
    switch (slot.kind) {
      case SearchSpace::SlotKind::Action: actions[slot.node] = {v}; break;
      case SearchSpace::SlotKind::Initial: initial[slot.observation] = {v}; break;
      case SearchSpace::SlotKind::Successor:
        successors[static_cast<std::size_t>(slot.node) * O + slot.observation] = {v};
        break;
    }
  }
  return ConstraintSet(N, O, c.num_actions(), std::move(actions), std::move(successors),
                       std::move(initial));
}

DeterministicPolicy to_policy(const SearchSpace& space, const PartialPolicy& partial) {
  const Index N = space.constraints().num_nodes();
  const Index O = space.constraints().num_observations();
  DeterministicPolicy p;
  p.num_actions = space.constraints().num_actions();
  p.action_of.assign(N, 0);
  p.init_of.assign(O, 0);
  p.succ_of.assign(static_cast<std::size_t>(N) * O, 0);
  for (Index i = 0; i < space.num_slots(); ++i) {
    const Index v = partial.choice[i];
    if (v == kFree) throw std::invalid_argument("partial policy is not complete");
    const auto& slot = space.slot(i);
    switch (slot.kind) {
      case SearchSpace::SlotKind::Action: p.action_of[slot.node] = v; break;
      case SearchSpace::SlotKind::Initial: p.init_of[slot.observation] = v; break;
      case SearchSpace::SlotKind::Successor: p.succ_of[slot.node * O + slot.observation] = v; break;
    }
  }
  return p;
}

OptimalSolution upper_bound(const SearchSpace& space, const PartialPolicy& partial,
                            const Vector* warm, const SolverOptions& options) {
  const ConstraintSet c = restrict(space, partial);
  return solve_optimal(CrossModel{space.model(), c}, warm, options);
}

// ---------------------------------------------------------------------------
// Lower bounds

namespace {

std::vector<Index> heuristic_completion(const SearchSpace& space, const PartialPolicy& partial,
                                        const SolverOptions& options) {
  const Pomdp& m = space.model();
  const Index N = space.constraints().num_nodes();
  const Index O = m.num_observations();
  const Index S = m.num_states();
  const Index A = m.num_actions();
  std::vector<Index> choice = partial.choice;

  OptimalSolution sol = upper_bound(space, partial, nullptr, options);

  // Actions, ranked by occupancy-weighted greedy usage over the free nodes.
  if (partial.depth < N) {
    const Vector occ = occupancy(m, N, sol.best_action, sol.best_successor, sol.best_initial);
    std::vector<Scalar> usage(A, 0.0);
    for (Index n = partial.depth; n < N; ++n)
      for (Index s = 0; s < S; ++s) usage[sol.action(n, s, S)] += occ[n * S + s];
    std::vector<Index> ranked(A);
    for (Index a = 0; a < A; ++a) ranked[a] = a;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](Index x, Index y) { return usage[x] > usage[y]; });
    Index k = 0;
    for (Index n = partial.depth; n < N; ++n, ++k) {
      std::vector<Index> candidates;
      for (Index a : ranked)
        if (space.constraints().allows_action(n, a)) candidates.push_back(a);
      choice[n] = candidates[k % candidates.size()];
    }
    PartialPolicy fixed = partial;
    std::copy(choice.begin(), choice.begin() + N, fixed.choice.begin());
    fixed.depth = std::max(partial.depth, N);
    sol = upper_bound(space, fixed, &sol.value.values, options);
  }
  const Vector& V = sol.value.values;

  // Initial nodes: best expected start value per observation.
  for (Index o = 0; o < O; ++o) {
    Index& slot = choice[N + o];
    if (slot != kFree) continue;
    slot = argmax_allowed(space.constraints().initial(o), [&](Index n) {
      Scalar acc = 0;
      for (Index s = 0; s < S; ++s) acc += m.initial_belief()[s] * m.obs(s, o) * V[n * S + s];
      return acc;
    });
  }
  if (std::all_of(choice.begin(), choice.end(), [](Index v) { return v != kFree; })) return choice;

  // Successors: best value of the states each (node, observation) leads into,
  // weighted by the flow the greedy policy sends there.
  std::vector<Index> initial = sol.best_initial;
  for (Index o = 0; o < O; ++o)
    for (Index s = 0; s < S; ++s) initial[static_cast<std::size_t>(o) * S + s] = choice[N + o];
  const Vector occ = occupancy(m, N, sol.best_action, sol.best_successor, initial);
  Vector flow(S);
  for (Index n = 0; n < N; ++n) {
    for (Index o = 0; o < O; ++o) {
      Index& slot = choice[N + O + n * O + o];
      if (slot != kFree) continue;
      flow.setZero();
      for (Index s = 0; s < S; ++s) {
        const Scalar mass = occ[n * S + s];
        if (mass == 0.0) continue;
        for (const auto& t : m.successors(s, choice[n])) flow[t.next] += mass * t.prob * m.obs(t.next, o);
      }
      if (flow.sum() == 0.0)
        for (Index s = 0; s < S; ++s) flow[s] = m.obs(s, o);
      slot = argmax_allowed(space.constraints().successors(n, o), [&](Index next) {
        Scalar acc = 0;
        for (Index s = 0; s < S; ++s) acc += flow[s] * V[next * S + s];
        return acc;
      });
    }
  }
  return choice;
}

}  // namespace

LowerBound lower_bound(const SearchSpace& space, const PartialPolicy& partial,
                       const LowerBoundOptions& lb, const SolverOptions& options) {
  std::vector<Index> choice;
  if (lb.strategy == LowerBoundStrategy::Random) {
    std::mt19937_64 rng(lb.seed);
    choice = partial.choice;
    for (Index i = partial.depth; i < space.num_slots(); ++i) {
      const auto allowed = space.allowed(i);
      const auto k = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(allowed.size()));
      choice[i] = allowed[std::min(k, allowed.size() - 1)];
    }
  } else {
    choice = heuristic_completion(space, partial, options);
  }

  PartialPolicy full;
  full.choice = std::move(choice);
  full.depth = space.num_slots();
  LowerBound result;
  result.policy = to_policy(space, full);
  result.value = evaluate_criterion(space.model(), result.policy, options);
  result.evaluations = 1;
  if (lb.local_search) result = improve_locally(space, partial, std::move(result), options);
  return result;
}

LowerBound improve_locally(const SearchSpace& space, const PartialPolicy& partial, LowerBound start,
                           const SolverOptions& options) {
  const DeterministicPolicy& p = start.policy;
  const Index N = p.num_nodes();
  const Index O = p.num_observations();
  PartialPolicy full = PartialPolicy::root(space);
  full.depth = space.num_slots();
  for (Index n = 0; n < N; ++n) full.choice[n] = p.action_of[n];
  for (Index o = 0; o < O; ++o) full.choice[N + o] = p.init_of[o];
  for (std::size_t i = 0; i < p.succ_of.size(); ++i) full.choice[N + O + i] = p.succ_of[i];

  for (Index i = partial.depth; i < space.num_slots(); ++i) {
    const Index current = full.choice[i];
    Index best = current;
    Scalar best_value = start.value;
    for (Index v : space.allowed(i)) {
      if (v == current) continue;
      full.choice[i] = v;
      const Scalar value = evaluate_criterion(space.model(), to_policy(space, full), options);
      ++start.evaluations;
      if (value > best_value + 1e-10) {
        best = v;
        best_value = value;
      }
    }
    full.choice[i] = best;
    start.value = best_value;
  }
  start.policy = to_policy(space, full);
  return start;
}

// ---------------------------------------------------------------------------
// Expansion

std::vector<PartialPolicy> expand(const SearchSpace& space, const PartialPolicy& partial,
                                  const ExpandOptions& options) {
  if (partial.complete()) throw std::invalid_argument("cannot expand a complete policy");
  const Index i = partial.depth;
  const auto allowed = space.allowed(i);
  std::vector<PartialPolicy> children;
  if (options.reduce_irrelevant && !space.relevant(i)) {
    children.push_back(partial.with_next(allowed.front()));
    return children;
  }
  const auto& slot = space.slot(i);
  const bool ordered = options.symmetry && slot.kind == SearchSpace::SlotKind::Action &&
                       space.interchangeable_with_previous(slot.node);
  for (Index v : allowed) {
    if (ordered && v < partial.choice[slot.node - 1]) continue;
    children.push_back(partial.with_next(v));
  }
  return children;
}

// ---------------------------------------------------------------------------
// Branch and bound

namespace {

class Search {
 public:
  Search(const SearchSpace& space, const SearchOptions& options, SearchReport& report)
      : space_(space), options_(options), report_(report), start_(Clock::now()) {}

  struct Child {
    PartialPolicy partial;
    Scalar ub;
    std::shared_ptr<const Vector> values;
  };

  void run() {
    const PartialPolicy root = PartialPolicy::root(space_);
    OptimalSolution sol = upper_bound(space_, root, nullptr, options_.solver);
    ++report_.bound_solves;
    report_.root_upper_bound = sol.value.criterion;
    auto values = std::make_shared<const Vector>(std::move(sol.value.values));

    if (options_.lower_bound_mode != LowerBoundMode::None) try_lower_bound(root, true);

    if (options_.prune && report_.root_upper_bound <= incumbent_ + kPruneSlack) {
      // The incumbent already meets the root bound.
    } else if (options_.order == SearchOrder::DepthFirst) {
      depth_first(root, report_.root_upper_bound, values);
    } else {
      best_first(root, report_.root_upper_bound, values);
    }

    if (!has_incumbent_) {
      const auto lb = lower_bound(space_, root, {}, options_.solver);
      report_.policy_evaluations += lb.evaluations;
      offer(lb.value, lb.policy);
    }
    report_.best_value = incumbent_;
    report_.proven = !stopped_;
  }

 private:
  void offer(Scalar value, const DeterministicPolicy& policy) {
    if (!has_incumbent_ || value > incumbent_) {
      incumbent_ = value;
      has_incumbent_ = true;
      report_.best_policy = policy;
    }
  }

  /// Local search runs at the root only, and only while the completion
  /// still falls short of the root bound.
  void try_lower_bound(const PartialPolicy& partial, bool at_root) {
    LowerBoundOptions lb = options_.lower_bound;
    lb.seed = options_.lower_bound.seed + report_.nodes_expanded;
    lb.local_search = false;
    auto result = lower_bound(space_, partial, lb, options_.solver);
    report_.policy_evaluations += result.evaluations;
    offer(result.value, result.policy);
    if (at_root && options_.lower_bound.local_search && !prunable(report_.root_upper_bound)) {
      const int before = result.evaluations;
      result = improve_locally(space_, partial, std::move(result), options_.solver);
      report_.policy_evaluations += result.evaluations - before;
      offer(result.value, result.policy);
    }
  }

  bool budget_exhausted() {
    if (options_.node_cap > 0 && report_.nodes_expanded >= options_.node_cap) stopped_ = true;
    if (options_.time_cap_seconds > 0 &&
        std::chrono::duration<double>(Clock::now() - start_).count() > options_.time_cap_seconds)
      stopped_ = true;
    return stopped_;
  }

  bool prunable(Scalar ub) const { return options_.prune && ub <= incumbent_ + kPruneSlack; }

  std::vector<Child> children_of(const PartialPolicy& partial, Scalar ub,
                                 const std::shared_ptr<const Vector>& values) {
    const Index slot = partial.depth;
    auto kids = expand(space_, partial, options_.expand);
    const bool unchanged = kids.size() == 1 && (space_.allowed(slot).size() == 1 ||
                                                (options_.expand.reduce_irrelevant && !space_.relevant(slot)));
    std::vector<Child> out;
    out.reserve(kids.size());
    for (auto& kid : kids) {
      Child c{std::move(kid), ub, values};
      if (c.partial.complete()) {
        const auto policy = to_policy(space_, c.partial);
        c.ub = evaluate_criterion(space_.model(), policy, options_.solver);
        c.values.reset();
        ++report_.policy_evaluations;
        offer(c.ub, policy);
      } else if (!unchanged) {
        OptimalSolution sol = upper_bound(space_, c.partial,
                                          options_.warm_start ? values.get() : nullptr, options_.solver);
        ++report_.bound_solves;
        c.ub = sol.value.criterion;
        c.values = std::make_shared<const Vector>(std::move(sol.value.values));
      }
      if (options_.trace)
        report_.trace.push_back(trace_line(c.partial.depth, slot, c.partial.choice[slot], c.ub,
                                           has_incumbent_ ? incumbent_ : -INFINITY));
      out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const Child& a, const Child& b) { return a.ub > b.ub; });
    return out;
  }

  void depth_first(const PartialPolicy& partial, Scalar ub, const std::shared_ptr<const Vector>& values) {
    if (budget_exhausted()) return;
    ++report_.nodes_expanded;
    if (options_.lower_bound_mode == LowerBoundMode::EveryNode && partial.depth > 0)
      try_lower_bound(partial, false);
    auto kids = children_of(partial, ub, values);
    for (auto& kid : kids) {
      if (stopped_) return;
      if (kid.partial.complete() || prunable(kid.ub)) continue;
      depth_first(kid.partial, kid.ub, kid.values);
    }
  }

  void best_first(const PartialPolicy& root, Scalar root_ub, const std::shared_ptr<const Vector>& values) {
    struct Entry {
      Scalar ub;
      std::uint64_t seq;
      PartialPolicy partial;
      std::shared_ptr<const Vector> values;
    };
    auto worse = [](const Entry& a, const Entry& b) {
      return a.ub != b.ub ? a.ub < b.ub : a.seq > b.seq;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
    std::uint64_t seq = 0;
    open.push({root_ub, seq++, root, values});
    while (!open.empty()) {
      Entry top = open.top();
      open.pop();
      if (prunable(top.ub)) break;
      if (budget_exhausted()) return;
      ++report_.nodes_expanded;
      if (options_.lower_bound_mode == LowerBoundMode::EveryNode && top.partial.depth > 0)
        try_lower_bound(top.partial, false);
      for (auto& kid : children_of(top.partial, top.ub, top.values)) {
        if (kid.partial.complete() || prunable(kid.ub)) continue;
        open.push({kid.ub, seq++, std::move(kid.partial), std::move(kid.values)});
      }
    }
  }

  const SearchSpace& space_;
  const SearchOptions& options_;
  SearchReport& report_;
  Clock::time_point start_;
  bool stopped_ = false;
  bool has_incumbent_ = false;
  Scalar incumbent_ = -std::numeric_limits<Scalar>::infinity();
};

}  // namespace

SearchReport branch_and_bound(const Pomdp& model, const ConstraintSet& constraints,
                              const SearchOptions& options) {
  const auto start = Clock::now();
  const SearchSpace space(model, constraints);
  SearchReport report;
  Search(space, options, report).run();
  report.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

/// Calls visit(choice) for every complete assignment in slot order.
template <class Visit>
void for_each_policy(const SearchSpace& space, bool symmetry, std::vector<Index>& choice, Index i,
                     Visit& visit) {
  if (i == space.num_slots()) {
    visit(choice);
    return;
  }
  const auto& slot = space.slot(i);
  const bool ordered = symmetry && slot.kind == SearchSpace::SlotKind::Action &&
                       space.interchangeable_with_previous(slot.node);
  for (Index v : space.allowed(i)) {
    if (ordered && v < choice[slot.node - 1]) continue;
    choice[i] = v;
    for_each_policy(space, symmetry, choice, i + 1, visit);
  }
  choice[i] = kFree;
}

std::uint64_t count_actions(const SearchSpace& space, bool symmetry, Index n, Index previous) {
  const Index N = space.constraints().num_nodes();
  if (n == N) return 1;
  const bool ordered = symmetry && space.interchangeable_with_previous(n);
  std::uint64_t total = 0;
  for (Index a : space.constraints().actions(n)) {
    if (ordered && a < previous) continue;
    total += count_actions(space, symmetry, n + 1, a);
    total = std::min(total, std::numeric_limits<std::uint64_t>::max() / 2);
  }
  return total;
}

}  // namespace

std::uint64_t count_policies(const SearchSpace& space, bool symmetry) {
  const Index N = space.constraints().num_nodes();
  std::uint64_t total = count_actions(space, symmetry, 0, 0);
  for (Index i = N; i < space.num_slots(); ++i) total = saturating_mul(total, space.allowed(i).size());
  return total;
}

SearchReport enumerate_all(const Pomdp& model, const ConstraintSet& constraints,
                           const EnumerateOptions& options) {
  const auto start = Clock::now();
  const SearchSpace space(model, constraints);
  const std::uint64_t count = count_policies(space, options.symmetry);
  if (count > options.cap)
    throw CapExceeded("enumeration would visit " + std::to_string(count) + " policies (cap " +
                      std::to_string(options.cap) + ")");

  SearchReport report;
  bool first = true;
  PartialPolicy full = PartialPolicy::root(space);
  full.depth = space.num_slots();
  auto visit = [&](const std::vector<Index>& choice) {
    full.choice = choice;
    const auto policy = to_policy(space, full);
    const Scalar value = evaluate_criterion(model, policy, options.solver);
    ++report.nodes_expanded;
    ++report.policy_evaluations;
    if (first || value > report.best_value) {
      report.best_value = value;
      report.best_policy = policy;
      first = false;
    }
  };
  std::vector<Index> choice(space.num_slots(), kFree);
  for_each_policy(space, options.symmetry, choice, 0, visit);
  report.proven = true;
  report.wall_time_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

}  // namespace pgraph
