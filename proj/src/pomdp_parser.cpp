#include "pgraph/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace pgraph {

namespace {

struct Token {
  std::string text;
  int line;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      ++i;
    } else if (ch == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == ':') {
      tokens.push_back({":", line});
      ++i;
    } else {
      const std::size_t start = i;
      while (i < text.size() && text[i] != ':' && text[i] != '#' &&
             !std::isspace(static_cast<unsigned char>(text[i])))
        ++i;
      tokens.push_back({std::string(text.substr(start, i - start)), line});
    }
  }
  return tokens;
}

std::optional<double> to_number(const std::string& s) {
  double value = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::optional<Index> to_index(const std::string& s) {
  Index value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

/// One declared dimension: a count and optional names.
struct Dimension {
  Index count = 0;
  std::vector<std::string> names;
  std::map<std::string, Index> lookup;
};

constexpr Index kAll = -1;

struct RewardStatement {
  Index action, from, to, observation;
  std::vector<double> values;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Pomdp run();

 private:
  bool at_end() const { return pos_ >= tokens_.size(); }
  int line() const {
    if (tokens_.empty()) return 1;
    return at_end() ? tokens_.back().line : tokens_[pos_].line;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line(), what); }

  const Token& peek() const {
    if (at_end()) fail("unexpected end of input");
    return tokens_[pos_];
  }
  const Token& next() {
    const Token& t = peek();
    ++pos_;
    return t;
  }
  void expect_colon() {
    if (at_end() || tokens_[pos_].text != ":") fail("expected ':'");
    ++pos_;
  }
  bool next_is_colon() const { return !at_end() && tokens_[pos_].text == ":"; }

  /// True when the token at `at` starts a new top-level statement.
  bool statement_start(std::size_t at) const {
    if (at >= tokens_.size()) return true;
    static const char* keywords[] = {"discount", "values", "states", "actions",
                                     "observations", "start", "T", "O", "R"};
    const std::string& t = tokens_[at].text;
    for (const char* k : keywords) {
      if (t == k) {
        if (t == "start") return true;
        return at + 1 < tokens_.size() && tokens_[at + 1].text == ":";
      }
    }
    return false;
  }

  double number() {
    const Token& t = next();
    const auto v = to_number(t.text);
    if (!v) throw ParseError(t.line, "expected a number, found '" + t.text + "'");
    return *v;
  }

  void parse_dimension(Dimension& dim, const char* what);
  Index resolve(const Dimension& dim, const Token& token, const char* what) const;
  Index spec(const Dimension& dim, const char* what) {
    const Token& t = next();
    if (t.text == "*") return kAll;
    return resolve(dim, t, what);
  }
  void require_dimensions() const {
    if (states_.count == 0 || actions_.count == 0 || observations_.count == 0)
      fail("states, actions and observations must be declared first");
  }
  static std::vector<Index> expand(Index spec, Index count) {
    std::vector<Index> out;
    if (spec == kAll) {
      for (Index i = 0; i < count; ++i) out.push_back(i);
    } else {
      out.push_back(spec);
    }
    return out;
  }

  void parse_start();
  void parse_transition();
  void parse_observation();
  void parse_reward();
  std::vector<double> numbers(std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) v = number();
    return out;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  std::optional<double> discount_;
  Dimension states_, actions_, observations_;
  std::optional<Vector> start_;
  std::vector<std::map<Index, double>> trans_;  // (a, s) -> s' -> p
  std::vector<Matrix> obs_;                     // per action, |S| x |O|
  std::vector<std::vector<int>> obs_line_;      // per action, last line that set (s', o)
  std::vector<RewardStatement> rewards_;
};

void Parser::parse_dimension(Dimension& dim, const char* what) {
  if (dim.count != 0) fail(std::string(what) + " declared twice");
  expect_colon();
  const Token& first = next();
  if (const auto n = to_index(first.text)) {
    if (*n <= 0) throw ParseError(first.line, std::string(what) + " count must be positive");
    dim.count = *n;
    return;
  }
  dim.names.push_back(first.text);
  while (!statement_start(pos_)) dim.names.push_back(next().text);
  dim.count = static_cast<Index>(dim.names.size());
  for (Index i = 0; i < dim.count; ++i)
    if (!dim.lookup.emplace(dim.names[i], i).second)
      fail(std::string("duplicate ") + what + " name '" + dim.names[i] + "'");
}

Index Parser::resolve(const Dimension& dim, const Token& token, const char* what) const {
  if (!dim.names.empty()) {
    const auto it = dim.lookup.find(token.text);
    if (it != dim.lookup.end()) return it->second;
  }
  if (const auto n = to_index(token.text)) {
    if (*n >= 0 && *n < dim.count) return *n;
    throw ParseError(token.line, std::string(what) + " index " + token.text + " out of range");
  }
  throw ParseError(token.line, std::string("unknown ") + what + " '" + token.text + "'");
}

void Parser::parse_start() {
  require_dimensions();
  const Index S = states_.count;
  Vector belief = Vector::Zero(S);
  if (!next_is_colon()) {
    const Token& mode = next();
    if (mode.text != "include" && mode.text != "exclude")
      throw ParseError(mode.line, "expected ':', 'include' or 'exclude' after 'start'");
    expect_colon();
    std::vector<Index> listed;
    while (!statement_start(pos_)) listed.push_back(resolve(states_, next(), "state"));
    if (listed.empty()) fail("empty start state list");
    std::vector<bool> member(S, mode.text == "exclude");
    for (Index s : listed) member[s] = mode.text == "include";
    Index count = 0;
    for (bool m : member) count += m ? 1 : 0;
    if (count == 0) fail("start state list excludes every state");
    for (Index s = 0; s < S; ++s) belief[s] = member[s] ? 1.0 / count : 0.0;
    start_ = belief;
    return;
  }
  expect_colon();
  std::size_t count = 0;
  while (!statement_start(pos_ + count)) ++count;
  if (count == 1 && peek().text == "uniform") {
    next();
    belief.setConstant(1.0 / S);
  } else if (count == static_cast<std::size_t>(S) && to_number(peek().text)) {
    for (Index s = 0; s < S; ++s) belief[s] = number();
  } else if (count == 1) {
    belief[resolve(states_, next(), "state")] = 1.0;
  } else {
    fail("start belief needs " + std::to_string(S) + " probabilities");
  }
  start_ = belief;
}

void Parser::parse_transition() {
  require_dimensions();
  const Index S = states_.count;
  expect_colon();
  const Index a = spec(actions_, "action");
  std::optional<Index> from, to;
  if (next_is_colon()) {
    ++pos_;
    from = spec(states_, "state");
    if (next_is_colon()) {
      ++pos_;
      to = spec(states_, "state");
    }
  }
  auto set = [&](Index act, Index s, Index sp, double p) {
    auto& row = trans_[static_cast<std::size_t>(act) * S + s];
    if (p == 0.0)
      row.erase(sp);
    else
      row[sp] = p;
  };

  if (to) {
    const double p = number();
    for (Index act : expand(a, actions_.count))
      for (Index s : expand(*from, S))
        for (Index sp : expand(*to, S)) set(act, s, sp, p);
  } else if (from) {
    std::vector<double> row;
    if (peek().text == "uniform") {
      next();
      row.assign(S, 1.0 / S);
    } else {
      row = numbers(S);
    }
    for (Index act : expand(a, actions_.count))
      for (Index s : expand(*from, S))
        for (Index sp = 0; sp < S; ++sp) set(act, s, sp, row[sp]);
  } else {
    const std::string& keyword = peek().text;
    std::vector<double> matrix;
    if (keyword == "uniform") {
      next();
      matrix.assign(static_cast<std::size_t>(S) * S, 1.0 / S);
    } else if (keyword == "identity") {
      next();
      matrix.assign(static_cast<std::size_t>(S) * S, 0.0);
      for (Index s = 0; s < S; ++s) matrix[static_cast<std::size_t>(s) * S + s] = 1.0;
    } else {
      matrix = numbers(static_cast<std::size_t>(S) * S);
    }
    for (Index act : expand(a, actions_.count))
      for (Index s = 0; s < S; ++s)
        for (Index sp = 0; sp < S; ++sp) set(act, s, sp, matrix[static_cast<std::size_t>(s) * S + sp]);
  }
}

void Parser::parse_observation() {
  require_dimensions();
  const Index S = states_.count;
  const Index O = observations_.count;
  const int at_line = line();
  expect_colon();
  const Index a = spec(actions_, "action");
  std::optional<Index> state, obs;
  if (next_is_colon()) {
    ++pos_;
    state = spec(states_, "state");
    if (next_is_colon()) {
      ++pos_;
      obs = spec(observations_, "observation");
    }
  }
  auto set = [&](Index act, Index sp, Index o, double p) {
    obs_[act](sp, o) = p;
    obs_line_[act][static_cast<std::size_t>(sp) * O + o] = at_line;
  };

  if (obs) {
    const double p = number();
    for (Index act : expand(a, actions_.count))
      for (Index sp : expand(*state, S))
        for (Index o : expand(*obs, O)) set(act, sp, o, p);
  } else if (state) {
    std::vector<double> row;
    if (peek().text == "uniform") {
      next();
      row.assign(O, 1.0 / O);
    } else {
      row = numbers(O);
    }
    for (Index act : expand(a, actions_.count))
      for (Index sp : expand(*state, S))
        for (Index o = 0; o < O; ++o) set(act, sp, o, row[o]);
  } else {
    const std::string& keyword = peek().text;
    std::vector<double> matrix;
    if (keyword == "uniform") {
      next();
      matrix.assign(static_cast<std::size_t>(S) * O, 1.0 / O);
    } else if (keyword == "identity") {
      if (S != O) fail("'identity' observation matrix needs |S| = |O|");
      next();
      matrix.assign(static_cast<std::size_t>(S) * O, 0.0);
      for (Index s = 0; s < S; ++s) matrix[static_cast<std::size_t>(s) * O + s] = 1.0;
    } else {
      matrix = numbers(static_cast<std::size_t>(S) * O);
    }
    for (Index act : expand(a, actions_.count))
      for (Index sp = 0; sp < S; ++sp)
        for (Index o = 0; o < O; ++o) set(act, sp, o, matrix[static_cast<std::size_t>(sp) * O + o]);
  }
}

void Parser::parse_reward() {
  require_dimensions();
  const Index S = states_.count;
  const Index O = observations_.count;
  expect_colon();
  RewardStatement r{spec(actions_, "action"), kAll, kAll, kAll, {}};
  int specs = 1;
  if (next_is_colon()) {
    ++pos_;
    r.from = spec(states_, "state");
    ++specs;
    if (next_is_colon()) {
      ++pos_;
      r.to = spec(states_, "state");
      ++specs;
      if (next_is_colon()) {
        ++pos_;
        r.observation = spec(observations_, "observation");
        ++specs;
      }
    }
  }
  switch (specs) {
    case 4: r.values = numbers(1); break;
    case 3: r.values = numbers(O); break;
    case 2: r.values = numbers(static_cast<std::size_t>(S) * O); break;
    default: fail("reward entry needs at least an action and a start state");
  }
  rewards_.push_back(std::move(r));
}

Pomdp Parser::run() {
  while (!at_end()) {
    const Token& head = next();
    if (head.text == "discount") {
      expect_colon();
      discount_ = number();
    } else if (head.text == "values") {
      expect_colon();
      const Token& kind = next();
      if (kind.text == "cost") throw ParseError(kind.line, "'values: cost' is not supported");
      if (kind.text != "reward") throw ParseError(kind.line, "expected 'reward' or 'cost'");
    } else if (head.text == "states") {
      parse_dimension(states_, "states");
    } else if (head.text == "actions") {
      parse_dimension(actions_, "actions");
    } else if (head.text == "observations") {
      parse_dimension(observations_, "observations");
    } else if (head.text == "start") {
      parse_start();
    } else if (head.text == "T" || head.text == "O" || head.text == "R") {
      require_dimensions();
      if (trans_.empty()) {
        trans_.resize(static_cast<std::size_t>(actions_.count) * states_.count);
        obs_.assign(actions_.count, Matrix::Zero(states_.count, observations_.count));
        obs_line_.assign(actions_.count, std::vector<int>(static_cast<std::size_t>(states_.count) *
                                                              observations_.count, 0));
      }
      if (head.text == "T") parse_transition();
      else if (head.text == "O") parse_observation();
      else parse_reward();
    } else {
      throw ParseError(head.line, "unexpected token '" + head.text + "'");
    }
  }

  if (!discount_) throw ParseError(line(), "missing 'discount:'");
  require_dimensions();
  const Index S = states_.count;
  const Index A = actions_.count;
  const Index O = observations_.count;
  if (trans_.empty()) {
    trans_.resize(static_cast<std::size_t>(A) * S);
    obs_.assign(A, Matrix::Zero(S, O));
    obs_line_.assign(A, std::vector<int>(static_cast<std::size_t>(S) * O, 0));
  }

  for (Index a = 1; a < A; ++a) {
    for (Index sp = 0; sp < S; ++sp) {
      for (Index o = 0; o < O; ++o) {
        if (std::abs(obs_[a](sp, o) - obs_[0](sp, o)) > kProbabilityTolerance) {
          const int at = std::max(obs_line_[a][static_cast<std::size_t>(sp) * O + o],
                                  obs_line_[0][static_cast<std::size_t>(sp) * O + o]);
          std::ostringstream msg;
          msg << "action-dependent observation model at (s'=" << sp << ", o=" << o << ")";
          throw ParseError(std::max(at, 1), msg.str());
        }
      }
    }
  }

  // Rewards per nonzero transition, per observation, last statement wins.
  std::vector<std::vector<std::vector<double>>> table(static_cast<std::size_t>(A) * S);
  for (Index a = 0; a < A; ++a)
    for (Index s = 0; s < S; ++s)
      table[static_cast<std::size_t>(a) * S + s].assign(trans_[static_cast<std::size_t>(a) * S + s].size(),
                                                        std::vector<double>(O, 0.0));
  for (const auto& r : rewards_) {
    for (Index a : expand(r.action, A)) {
      for (Index s : expand(r.from, S)) {
        const auto& row = trans_[static_cast<std::size_t>(a) * S + s];
        auto& cells = table[static_cast<std::size_t>(a) * S + s];
        std::size_t k = 0;
        for (const auto& [sp, p] : row) {
          if (r.to == kAll || r.to == sp) {
            for (Index o : expand(r.observation, O)) {
              double v = 0;
              if (r.values.size() == 1) v = r.values[0];
              else if (r.values.size() == static_cast<std::size_t>(O)) v = r.values[o];
              else v = r.values[static_cast<std::size_t>(sp) * O + o];
              cells[k][o] = v;
            }
          }
          ++k;
        }
      }
    }
  }

  std::vector<std::vector<Transition>> rows(static_cast<std::size_t>(S) * A);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      const auto& row = trans_[static_cast<std::size_t>(a) * S + s];
      const auto& cells = table[static_cast<std::size_t>(a) * S + s];
      std::size_t k = 0;
      for (const auto& [sp, p] : row) {
        const auto& per_obs = cells[k++];
        bool constant = true;
        for (double v : per_obs) constant = constant && v == per_obs.front();
        double reward = per_obs.front();
        if (!constant) {
          reward = 0;
          for (Index o = 0; o < O; ++o) reward += obs_[0](sp, o) * per_obs[o];
        }
        rows[static_cast<std::size_t>(s) * A + a].push_back({sp, p, reward});
      }
    }
  }

  Names names{states_.names, actions_.names, observations_.names};
  Vector start = start_ ? *start_ : Vector::Constant(S, 1.0 / S);
  Pomdp model(S, A, O, obs_[0], std::move(rows), *discount_, std::move(start), std::move(names));

  const auto violations = validate_pomdp(model);
  if (!violations.empty()) {
    std::string text = "invalid model:";
    for (const auto& v : violations) text += "\n  " + v.message();
    throw ValidationError(text);
  }
  return model;
}

}  // namespace

Pomdp parse_pomdp(std::string_view text) { return Parser(text).run(); }

Pomdp read_pomdp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pomdp(buffer.str());
}

}  // namespace pgraph
