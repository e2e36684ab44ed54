#include "pgraph/io.hpp"

#include <cctype>
#include <cstdio>
#include <string>

namespace pgraph {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool usable_names(const std::vector<std::string>& names, Index count) {
  if (names.size() != static_cast<std::size_t>(count)) return false;
  for (const auto& n : names) {
    if (n.empty() || n == "*" || n == "start") return false;
    for (char c : n)
      if (c == ':' || c == '#' || std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

struct Labels {
  std::vector<std::string> text;

  Labels(const std::vector<std::string>& names, Index count) {
    const bool named = usable_names(names, count);
    for (Index i = 0; i < count; ++i) text.push_back(named ? names[i] : std::to_string(i));
  }
};

std::string declaration(const std::vector<std::string>& names, Index count) {
  if (!usable_names(names, count)) return std::to_string(count);
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : " ") + n;
  return out;
}

}  // namespace

std::string write_pomdp(const Pomdp& model) {
  const Index S = model.num_states();
  const Index A = model.num_actions();
  const Index O = model.num_observations();
  const Labels states(model.names().states, S);
  const Labels actions(model.names().actions, A);
  const Labels observations(model.names().observations, O);

  std::string out;
  out += "discount: " + fmt17(model.discount()) + "\n";
  out += "values: reward\n";
  out += "states: " + declaration(model.names().states, S) + "\n";
  out += "actions: " + declaration(model.names().actions, A) + "\n";
  out += "observations: " + declaration(model.names().observations, O) + "\n";
  out += "start:";
  for (Index s = 0; s < S; ++s) out += " " + fmt17(model.initial_belief()[s]);
  out += "\n\n";

  for (Index a = 0; a < A; ++a)
    for (Index s = 0; s < S; ++s)
      for (const auto& t : model.successors(s, a))
        out += "T: " + actions.text[a] + " : " + states.text[s] + " : " + states.text[t.next] + " " +
               fmt17(t.prob) + "\n";
  out += "\n";
  for (Index s = 0; s < S; ++s) {
    out += "O: * : " + states.text[s] + "\n";
    for (Index o = 0; o < O; ++o) out += (o == 0 ? "" : " ") + fmt17(model.obs(s, o));
    out += "\n";
  }
  out += "\n";
  for (Index a = 0; a < A; ++a)
    for (Index s = 0; s < S; ++s)
      for (const auto& t : model.successors(s, a))
        if (t.reward != 0.0)
          out += "R: " + actions.text[a] + " : " + states.text[s] + " : " + states.text[t.next] +
                 " : * " + fmt17(t.reward) + "\n";
  return out;
}

}  // namespace pgraph
