#include "pgraph/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace pgraph {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
std::vector<std::pair<int, std::vector<std::string>>> split_lines(std::string_view text) {
  std::vector<std::pair<int, std::vector<std::string>>> out;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream words{std::string(line)};
    std::vector<std::string> fields;
    for (std::string w; words >> w;) fields.push_back(w);
    if (!fields.empty()) out.emplace_back(number, std::move(fields));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : lines_(split_lines(text)) {}

  const std::vector<std::string>& next() {
    if (at_ >= lines_.size()) throw ParseError(last_line(), "unexpected end of file");
    return lines_[at_++].second;
  }
  int line() const { return at_ == 0 ? 1 : lines_[at_ - 1].first; }
  bool done() const { return at_ >= lines_.size(); }

  void expect(const std::string& keyword) {
    const auto& f = next();
    if (f.size() != 1 || f[0] != keyword) fail("expected '" + keyword + "'");
  }

  std::string value_of(const std::string& keyword) {
    const auto& f = next();
    if (f.size() != 2 || f[0] != keyword) fail("expected '" + keyword + " <value>'");
    return f[1];
  }

  Index count_of(const std::string& keyword) {
    const Index n = to_index(value_of(keyword));
    if (n <= 0) fail(keyword + " must be positive");
    return n;
  }

  Index to_index(const std::string& word) const {
    Index v = 0;
    const auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc() || p != word.data() + word.size()) fail("expected an integer, found '" + word + "'");
    return v;
  }

  double to_double(const std::string& word) const {
    double v = 0;
    const auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc() || p != word.data() + word.size()) fail("expected a number, found '" + word + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line(), what); }

 private:
  int last_line() const { return lines_.empty() ? 1 : lines_.back().first; }

  std::vector<std::pair<int, std::vector<std::string>>> lines_;
  std::size_t at_ = 0;
};

void write_rows(std::string& out, const Matrix& m, bool deterministic) {
  for (Index r = 0; r < m.rows(); ++r) {
    if (deterministic) {
      Index choice = 0;
      m.row(r).maxCoeff(&choice);
      out += std::to_string(choice) + "\n";
    } else {
      for (Index c = 0; c < m.cols(); ++c) out += (c == 0 ? "" : " ") + fmt17(m(r, c));
      out += "\n";
    }
  }
}

void read_rows(LineReader& in, Matrix& m, bool deterministic) {
  for (Index r = 0; r < m.rows(); ++r) {
    const auto& f = in.next();
    if (deterministic) {
      if (f.size() != 1) in.fail("expected one integer choice");
      const Index choice = in.to_index(f[0]);
      if (choice < 0 || choice >= m.cols()) in.fail("choice out of range");
      m(r, choice) = 1.0;
    } else {
      if (f.size() != static_cast<std::size_t>(m.cols()))
        in.fail("expected " + std::to_string(m.cols()) + " probabilities");
      for (Index c = 0; c < m.cols(); ++c) m(r, c) = in.to_double(f[c]);
    }
  }
}

}  // namespace

std::string write_policy_graph(const PolicyGraph& graph) {
  const bool det = graph.is_deterministic();
  std::string out = "pgraph 1\n";
  out += "nodes " + std::to_string(graph.num_nodes()) + "\n";
  out += "observations " + std::to_string(graph.num_observations()) + "\n";
  out += "actions " + std::to_string(graph.num_actions()) + "\n";
  out += std::string("deterministic ") + (det ? "yes" : "no") + "\n";
  out += "psi\n";
  write_rows(out, graph.action_dist, det);
  out += "eta0\n";
  write_rows(out, graph.initial_dist, det);
  out += "eta\n";
  write_rows(out, graph.node_trans, det);
  return out;
}

PolicyGraph read_policy_graph(std::string_view text) {
  LineReader in(text);
  if (in.value_of("pgraph") != "1") in.fail("unsupported policy graph version");
  const Index N = in.count_of("nodes");
  const Index O = in.count_of("observations");
  const Index A = in.count_of("actions");
  const std::string flag = in.value_of("deterministic");
  if (flag != "yes" && flag != "no") in.fail("deterministic must be 'yes' or 'no'");
  const bool det = flag == "yes";

  PolicyGraph graph(N, O, A);
  in.expect("psi");
  read_rows(in, graph.action_dist, det);
  in.expect("eta0");
  read_rows(in, graph.initial_dist, det);
  in.expect("eta");
  read_rows(in, graph.node_trans, det);
  if (!in.done()) {
    in.next();
    in.fail("trailing content after the eta table");
  }
  const auto problems = graph.violations();
  if (!problems.empty()) throw ValidationError("invalid policy graph: " + problems.front());
  return graph;
}

ConstraintSet read_constraints(std::string_view text, Index num_nodes, Index num_observations,
                               Index num_actions) {
  auto all = [](Index n) {
    std::vector<Index> v(n);
    for (Index i = 0; i < n; ++i) v[i] = i;
    return v;
  };
  std::vector<std::vector<Index>> actions(num_nodes, all(num_actions));
  std::vector<std::vector<Index>> successors(static_cast<std::size_t>(num_nodes) * num_observations,
                                             all(num_nodes));
  std::vector<std::vector<Index>> initial(num_observations, all(num_nodes));

  LineReader in(text);
  while (!in.done()) {
    const auto& f = in.next();
    const auto colon = std::find(f.begin(), f.end(), ":");
    if (colon == f.end()) in.fail("expected ':' separating the key from the allowed list");
    const std::vector<std::string> key(f.begin() + 1, colon);
    std::vector<Index> values;
    for (auto it = colon + 1; it != f.end(); ++it) values.push_back(in.to_index(*it));
    if (values.empty()) in.fail("empty allowed list");

    auto in_range = [&](Index v, Index bound) {
      if (v < 0 || v >= bound) in.fail("index out of range");
      return v;
    };
    if (f[0] == "actions" && key.size() == 1) {
      for (Index v : values) in_range(v, num_actions);
      actions[in_range(in.to_index(key[0]), num_nodes)] = values;
    } else if (f[0] == "successors" && key.size() == 2) {
      for (Index v : values) in_range(v, num_nodes);
      const Index n = in_range(in.to_index(key[0]), num_nodes);
      const Index o = in_range(in.to_index(key[1]), num_observations);
      successors[static_cast<std::size_t>(n) * num_observations + o] = values;
    } else if (f[0] == "initial" && key.size() == 1) {
      for (Index v : values) in_range(v, num_nodes);
      initial[in_range(in.to_index(key[0]), num_observations)] = values;
    } else {
      in.fail("unknown constraint line");
    }
  }
  return ConstraintSet(num_nodes, num_observations, num_actions, std::move(actions),
                       std::move(successors), std::move(initial));
}

}  // namespace pgraph
