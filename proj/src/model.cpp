#include "pgraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pgraph {

namespace {

void check_index_list(std::vector<Index>& list, Index bound, const char* what) {
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());
  if (list.empty()) throw std::invalid_argument(std::string("empty allowed set for ") + what);
  if (list.front() < 0 || list.back() >= bound)
    throw std::invalid_argument(std::string("allowed index out of range for ") + what);
}

std::vector<Index> iota_list(Index n) {
  std::vector<Index> v(n);
  for (Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

bool contains(std::span<const Index> list, Index value) {
  return std::binary_search(list.begin(), list.end(), value);
}

bool subset(const std::vector<Index>& a, const std::vector<Index>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Index argmax_row(const Matrix& m, Index row) {
  Index best = 0;
  for (Index j = 1; j < m.cols(); ++j)
    if (m(row, j) > m(row, best)) best = j;
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pomdp

Pomdp::Pomdp(Index num_states, Index num_actions, Index num_observations, Matrix obs,
             std::vector<std::vector<Transition>> rows, Scalar discount, Vector initial_belief,
             Names names)
    : num_states_(num_states),
      num_actions_(num_actions),
      num_observations_(num_observations),
      obs_(std::move(obs)),
      discount_(discount),
      initial_belief_(std::move(initial_belief)),
      names_(std::move(names)) {
  if (num_states <= 0 || num_actions <= 0 || num_observations <= 0)
    throw std::invalid_argument("POMDP dimensions must be positive");
  if (obs_.rows() != num_states || obs_.cols() != num_observations)
    throw std::invalid_argument("observation matrix must be |S| x |O|");
  if (rows.size() != static_cast<std::size_t>(num_states) * num_actions)
    throw std::invalid_argument("transition rows must be indexed by (s, a)");
  if (initial_belief_.size() != num_states)
    throw std::invalid_argument("initial belief must have |S| entries");

  offsets_.reserve(rows.size() + 1);
  offsets_.push_back(0);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(),
              [](const Transition& x, const Transition& y) { return x.next < y.next; });
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].next < 0 || row[i].next >= num_states)
        throw std::invalid_argument("transition target out of range");
      if (i > 0 && row[i].next == row[i - 1].next)
        throw std::invalid_argument("duplicate transition target in one (s, a) row");
    }
    entries_.insert(entries_.end(), row.begin(), row.end());
    offsets_.push_back(entries_.size());
  }
}

Scalar Pomdp::trans(Index s, Index a, Index next) const {
  const auto row = successors(s, a);
  const auto it = std::lower_bound(row.begin(), row.end(), next,
                                   [](const Transition& t, Index v) { return t.next < v; });
  return (it != row.end() && it->next == next) ? it->prob : 0.0;
}

Scalar Pomdp::reward(Index s, Index a, Index next) const {
  const auto row = successors(s, a);
  const auto it = std::lower_bound(row.begin(), row.end(), next,
                                   [](const Transition& t, Index v) { return t.next < v; });
  return (it != row.end() && it->next == next) ? it->reward : 0.0;
}

Scalar Pomdp::expected_reward(Index s, Index a) const {
  Scalar r = 0;
  for (const auto& t : successors(s, a)) r += t.prob * t.reward;
  return r;
}

Index Pomdp::max_branching() const {
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i)
    best = std::max(best, offsets_[i + 1] - offsets_[i]);
  return static_cast<Index>(best);
}

Pomdp Pomdp::with_discount(Scalar discount) const {
  Pomdp copy = *this;
  copy.discount_ = discount;
  return copy;
}

bool Pomdp::approx_equal(const Pomdp& other, Scalar tol) const {
  if (num_states_ != other.num_states_ || num_actions_ != other.num_actions_ ||
      num_observations_ != other.num_observations_)
    return false;
  if (std::abs(discount_ - other.discount_) > tol) return false;
  if ((obs_ - other.obs_).cwiseAbs().maxCoeff() > tol) return false;
  if ((initial_belief_ - other.initial_belief_).cwiseAbs().maxCoeff() > tol) return false;
  for (Index s = 0; s < num_states_; ++s) {
    for (Index a = 0; a < num_actions_; ++a) {
      const auto mine = successors(s, a);
      const auto theirs = other.successors(s, a);
      if (mine.size() != theirs.size()) return false;
      for (std::size_t i = 0; i < mine.size(); ++i) {
        if (mine[i].next != theirs[i].next) return false;
        if (std::abs(mine[i].prob - theirs[i].prob) > tol) return false;
        if (std::abs(mine[i].reward - theirs[i].reward) > tol) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// PolicyGraph

PolicyGraph::PolicyGraph(Index num_nodes, Index num_observations, Index num_actions)
    : action_dist(Matrix::Zero(num_nodes, num_actions)),
      node_trans(Matrix::Zero(num_nodes * num_observations, num_nodes)),
      initial_dist(Matrix::Zero(num_observations, num_nodes)) {}

std::vector<std::string> PolicyGraph::violations(Scalar tol) const {
  std::vector<std::string> out;
  auto check = [&](const Matrix& m, const char* name) {
    for (Index i = 0; i < m.rows(); ++i) {
      const Scalar sum = m.row(i).sum();
      if (std::abs(sum - 1.0) > tol) {
        std::ostringstream msg;
        msg << name << " row " << i << " sums to " << sum;
        out.push_back(msg.str());
      }
      if (m.row(i).minCoeff() < 0.0 || m.row(i).maxCoeff() > 1.0 + tol) {
        std::ostringstream msg;
        msg << name << " row " << i << " has an entry outside [0, 1]";
        out.push_back(msg.str());
      }
    }
  };
  if (node_trans.rows() != action_dist.rows() * initial_dist.rows() ||
      node_trans.cols() != action_dist.rows() || initial_dist.cols() != action_dist.rows()) {
    out.emplace_back("inconsistent policy graph shapes");
    return out;
  }
  check(action_dist, "psi");
  check(node_trans, "eta");
  check(initial_dist, "eta0");
  return out;
}

bool PolicyGraph::is_deterministic() const {
  auto point_masses = [](const Matrix& m) {
    return ((m.array() == 0.0) || (m.array() == 1.0)).all();
  };
  return point_masses(action_dist) && point_masses(node_trans) && point_masses(initial_dist);
}

bool PolicyGraph::operator==(const PolicyGraph& other) const {
  auto same = [](const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(action_dist, other.action_dist) && same(node_trans, other.node_trans) &&
         same(initial_dist, other.initial_dist);
}

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet::ConstraintSet(Index num_nodes, Index num_observations, Index num_actions,
                             std::vector<std::vector<Index>> allowed_actions,
                             std::vector<std::vector<Index>> allowed_successors,
                             std::vector<std::vector<Index>> allowed_initial)
    : num_nodes_(num_nodes),
      num_observations_(num_observations),
      num_actions_(num_actions),
      actions_(std::move(allowed_actions)),
      successors_(std::move(allowed_successors)),
      initial_(std::move(allowed_initial)) {
  if (num_nodes <= 0 || num_observations <= 0 || num_actions <= 0)
    throw std::invalid_argument("constraint set dimensions must be positive");
  if (actions_.size() != static_cast<std::size_t>(num_nodes) ||
      successors_.size() != static_cast<std::size_t>(num_nodes) * num_observations ||
      initial_.size() != static_cast<std::size_t>(num_observations))
    throw std::invalid_argument("constraint set shape mismatch");
  for (auto& l : actions_) check_index_list(l, num_actions, "actions");
  for (auto& l : successors_) check_index_list(l, num_nodes, "successors");
  for (auto& l : initial_) check_index_list(l, num_nodes, "initial nodes");
}

ConstraintSet ConstraintSet::unconstrained(Index num_nodes, Index num_observations,
                                           Index num_actions) {
  return ConstraintSet(
      num_nodes, num_observations, num_actions,
      std::vector<std::vector<Index>>(num_nodes, iota_list(num_actions)),
      std::vector<std::vector<Index>>(static_cast<std::size_t>(num_nodes) * num_observations,
                                      iota_list(num_nodes)),
      std::vector<std::vector<Index>>(num_observations, iota_list(num_nodes)));
}

bool ConstraintSet::allows_action(Index n, Index a) const { return contains(actions(n), a); }

bool ConstraintSet::allows_successor(Index n, Index o, Index next) const {
  return contains(successors(n, o), next);
}

bool ConstraintSet::allows_initial(Index o, Index n) const { return contains(initial(o), n); }

ConstraintSet ConstraintSet::with_action(Index n, Index a) const {
  ConstraintSet copy = *this;
  copy.actions_[n] = {a};
  return copy;
}

ConstraintSet ConstraintSet::with_successor(Index n, Index o, Index next) const {
  ConstraintSet copy = *this;
  copy.successors_[static_cast<std::size_t>(n) * num_observations_ + o] = {next};
  return copy;
}

ConstraintSet ConstraintSet::with_initial(Index o, Index n) const {
  ConstraintSet copy = *this;
  copy.initial_[o] = {n};
  return copy;
}

ConstraintSet ConstraintSet::with_fixed_start(Index node) const {
  ConstraintSet copy = *this;
  for (auto& list : copy.initial_) {
    const Index chosen = contains(list, node) ? node : list.front();
    list = {chosen};
  }
  return copy;
}

ConstraintSet ConstraintSet::swapped(Index i, Index j) const {
  auto relabel = [&](Index n) { return n == i ? j : (n == j ? i : n); };
  auto relabel_list = [&](std::vector<Index> list) {
    for (auto& n : list) n = relabel(n);
    std::sort(list.begin(), list.end());
    return list;
  };
  ConstraintSet copy = *this;
  for (Index n = 0; n < num_nodes_; ++n) {
    copy.actions_[relabel(n)] = actions_[n];
    for (Index o = 0; o < num_observations_; ++o)
      copy.successors_[static_cast<std::size_t>(relabel(n)) * num_observations_ + o] =
          relabel_list(successors_[static_cast<std::size_t>(n) * num_observations_ + o]);
  }
  for (Index o = 0; o < num_observations_; ++o) copy.initial_[o] = relabel_list(initial_[o]);
  return copy;
}

bool ConstraintSet::is_tighter_than(const ConstraintSet& looser) const {
  if (num_nodes_ != looser.num_nodes_ || num_observations_ != looser.num_observations_ ||
      num_actions_ != looser.num_actions_)
    return false;
  for (std::size_t i = 0; i < actions_.size(); ++i)
    if (!subset(actions_[i], looser.actions_[i])) return false;
  for (std::size_t i = 0; i < successors_.size(); ++i)
    if (!subset(successors_[i], looser.successors_[i])) return false;
  for (std::size_t i = 0; i < initial_.size(); ++i)
    if (!subset(initial_[i], looser.initial_[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// DeterministicPolicy

bool DeterministicPolicy::satisfies(const ConstraintSet& c) const {
  if (num_nodes() != c.num_nodes() || num_observations() != c.num_observations() ||
      num_actions != c.num_actions())
    return false;
  for (Index n = 0; n < num_nodes(); ++n) {
    if (!c.allows_action(n, action_of[n])) return false;
    for (Index o = 0; o < num_observations(); ++o)
      if (!c.allows_successor(n, o, successor(n, o))) return false;
  }
  for (Index o = 0; o < num_observations(); ++o)
    if (!c.allows_initial(o, init_of[o])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Validation

std::string Violation::message() const {
  std::ostringstream msg;
  switch (kind) {
    case Kind::Observation: msg << "observation row " << location << " sums to "; break;
    case Kind::Transition: msg << "transition row " << location << " sums to "; break;
    case Kind::NegativeEntry: msg << "negative probability at " << location << ": "; break;
    case Kind::InitialBelief: msg << "initial belief sums to "; break;
    case Kind::Discount: msg << "discount outside [0, 1): "; break;
    case Kind::Range: msg << "probability above 1 at " << location << ": "; break;
  }
  msg.precision(17);
  msg << magnitude;
  return msg.str();
}

std::vector<Violation> validate_pomdp(const Pomdp& model, Scalar tol) {
  std::vector<Violation> out;
  const Index S = model.num_states();
  auto where = [](auto... parts) {
    std::ostringstream s;
    s << '(';
    const char* sep = "";
    ((s << sep << parts, sep = ", "), ...);
    s << ')';
    return s.str();
  };

  for (Index s = 0; s < S; ++s) {
    const Scalar sum = model.obs().row(s).sum();
    if (std::abs(sum - 1.0) > tol) out.push_back({Violation::Kind::Observation, where(s), sum});
    for (Index o = 0; o < model.num_observations(); ++o) {
      if (model.obs(s, o) < 0.0)
        out.push_back({Violation::Kind::NegativeEntry, "B" + where(s, o), model.obs(s, o)});
      else if (model.obs(s, o) > 1.0 + tol)
        out.push_back({Violation::Kind::Range, "B" + where(s, o), model.obs(s, o)});
    }
  }
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < model.num_actions(); ++a) {
      Scalar sum = 0;
      for (const auto& t : model.successors(s, a)) {
        sum += t.prob;
        if (t.prob < 0.0)
          out.push_back({Violation::Kind::NegativeEntry, "T" + where(s, a, t.next), t.prob});
        else if (t.prob > 1.0 + tol)
          out.push_back({Violation::Kind::Range, "T" + where(s, a, t.next), t.prob});
      }
      if (std::abs(sum - 1.0) > tol) out.push_back({Violation::Kind::Transition, where(s, a), sum});
    }
  }
  const auto& belief = model.initial_belief();
  const Scalar belief_sum = belief.sum();
  if (std::abs(belief_sum - 1.0) > tol)
    out.push_back({Violation::Kind::InitialBelief, "start", belief_sum});
  for (Index s = 0; s < S; ++s)
    if (belief(s) < 0.0)
      out.push_back({Violation::Kind::NegativeEntry, "start" + where(s), belief(s)});
  const Scalar gamma = model.discount();
  if (!(gamma >= 0.0 && gamma < 1.0))
    out.push_back({Violation::Kind::Discount, "discount", gamma});
  return out;
}

void require_valid(const Pomdp& model) {
  const auto violations = validate_pomdp(model);
  if (violations.empty()) return;
  std::string text = "invalid POMDP:";
  for (const auto& v : violations) text += "\n  " + v.message();
  throw ValidationError(text);
}

// ---------------------------------------------------------------------------
// Constraint presets and conversions

ConstraintSet reactive_constraints(const Pomdp& model) {
  const Index O = model.num_observations();
  const Index A = model.num_actions();
  std::vector<std::vector<Index>> successors(static_cast<std::size_t>(O) * O);
  for (Index n = 0; n < O; ++n)
    for (Index o = 0; o < O; ++o) successors[static_cast<std::size_t>(n) * O + o] = {o};
  std::vector<std::vector<Index>> initial(O);
  for (Index o = 0; o < O; ++o) initial[o] = {o};
  return ConstraintSet(O, O, A, std::vector<std::vector<Index>>(O, iota_list(A)),
                       std::move(successors), std::move(initial));
}

ConstraintSet neighborhood_constraints(Index num_nodes, Index num_observations, Index num_actions,
                                       Index k) {
  if (k < 0) throw std::invalid_argument("neighborhood radius must be non-negative");
  std::vector<std::vector<Index>> successors(static_cast<std::size_t>(num_nodes) *
                                             num_observations);
  for (Index n = 0; n < num_nodes; ++n) {
    std::vector<Index> near;
    for (Index m = 0; m < num_nodes; ++m) {
      const Index d = std::abs(m - n);
      if (std::min(d, num_nodes - d) <= k) near.push_back(m);
    }
    for (Index o = 0; o < num_observations; ++o)
      successors[static_cast<std::size_t>(n) * num_observations + o] = near;
  }
  return ConstraintSet(num_nodes, num_observations, num_actions,
                       std::vector<std::vector<Index>>(num_nodes, iota_list(num_actions)),
                       std::move(successors),
                       std::vector<std::vector<Index>>(num_observations, iota_list(num_nodes)));
}

PolicyGraph as_stochastic(const DeterministicPolicy& det) {
  const Index N = det.num_nodes();
  const Index O = det.num_observations();
  if (det.succ_of.size() != static_cast<std::size_t>(N) * O)
    throw std::invalid_argument("deterministic policy successor table has the wrong size");
  PolicyGraph graph(N, O, det.num_actions);
  for (Index n = 0; n < N; ++n) {
    graph.action_dist(n, det.action_of[n]) = 1.0;
    for (Index o = 0; o < O; ++o) graph.node_trans(graph.trans_row(n, o), det.successor(n, o)) = 1.0;
  }
  for (Index o = 0; o < O; ++o) graph.initial_dist(o, det.init_of[o]) = 1.0;
  return graph;
}

DeterministicPolicy extract_deterministic(const PolicyGraph& graph) {
  DeterministicPolicy det;
  det.num_actions = graph.num_actions();
  for (Index n = 0; n < graph.num_nodes(); ++n) det.action_of.push_back(argmax_row(graph.action_dist, n));
  for (Index r = 0; r < graph.node_trans.rows(); ++r) det.succ_of.push_back(argmax_row(graph.node_trans, r));
  for (Index o = 0; o < graph.num_observations(); ++o)
    det.init_of.push_back(argmax_row(graph.initial_dist, o));
  return det;
}

PolicyGraph uniform_graph(const ConstraintSet& c) {
  PolicyGraph graph(c.num_nodes(), c.num_observations(), c.num_actions());
  for (Index n = 0; n < c.num_nodes(); ++n) {
    for (Index a : c.actions(n)) graph.action_dist(n, a) = 1.0 / c.actions(n).size();
    for (Index o = 0; o < c.num_observations(); ++o) {
      const auto allowed = c.successors(n, o);
      for (Index m : allowed) graph.node_trans(graph.trans_row(n, o), m) = 1.0 / allowed.size();
    }
  }
  for (Index o = 0; o < c.num_observations(); ++o)
    for (Index n : c.initial(o)) graph.initial_dist(o, n) = 1.0 / c.initial(o).size();
  return graph;
}

}  // namespace pgraph
