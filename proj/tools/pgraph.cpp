// pgraph command-line front end.
//
// Exit codes: 0 success (search proven), 2 parse or validation error,
// 3 a node/time/enumeration cap stopped the run, 4 internal failure.

#include "pgraph/bnb.hpp"
#include "pgraph/grad.hpp"
#include "pgraph/io.hpp"
#include "pgraph/simulate.hpp"
#include "pgraph/xproduct.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace pgraph;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCap = 3;
constexpr int kExitInternal = 4;

/// Input problems the user can fix; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

std::string fmt(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct ModelArgs {
  std::string path;
  double gamma_override = -1;

  void add(CLI::App* app) {
    app->add_option("--model", path, ".pomdp file")->required();
    app->add_option("--gamma-override", gamma_override, "replace the model's discount factor");
  }

  Pomdp load() const {
    Pomdp m = parse_pomdp(read_file(path));
    if (gamma_override >= 0) {
      if (gamma_override >= 1) throw UsageError("--gamma-override must lie in [0, 1)");
      m = m.with_discount(gamma_override);
    }
    return m;
  }
};

struct GraphArgs {
  int nodes = 0;
  std::string constraints = "none";
  bool fixed_start = false;

  void add(CLI::App* app) {
    app->add_option("--nodes", nodes, "number of policy-graph nodes (default |O| for reactive)");
    app->add_option("--constraints", constraints, "none | reactive | neighborhood:k | file:path");
    app->add_flag("--fixed-start", fixed_start, "every observation starts in node 0");
  }

  ConstraintSet build(const Pomdp& m) const {
    const Index O = m.num_observations();
    const Index A = m.num_actions();
    auto need_nodes = [&] {
      if (nodes <= 0) throw UsageError("--nodes is required with --constraints " + constraints);
      return static_cast<Index>(nodes);
    };
    ConstraintSet c = [&] {
      if (constraints == "none") return ConstraintSet::unconstrained(need_nodes(), O, A);
      if (constraints == "reactive") {
        if (nodes > 0 && nodes != O) throw UsageError("reactive constraints need --nodes equal to |O|");
        return reactive_constraints(m);
      }
      if (constraints.starts_with("neighborhood:")) {
        const int k = std::stoi(constraints.substr(13));
        return neighborhood_constraints(need_nodes(), O, A, k);
      }
      if (constraints.starts_with("file:"))
        return read_constraints(read_file(constraints.substr(5)), need_nodes(), O, A);
      throw UsageError("unknown constraint preset '" + constraints + "'");
    }();
    return fixed_start ? c.with_fixed_start(0) : c;
  }
};

struct SolverArgs {
  int threads = 1;
  double tolerance = 1e-9;

  void add(CLI::App* app) {
    app->add_option("--threads", threads, "worker threads for backup sweeps")->check(CLI::PositiveNumber);
    app->add_option("--tolerance", tolerance, "certified sup-norm error of value solves");
  }

  SolverOptions options() const {
    SolverOptions o;
    o.threads = threads;
    o.tolerance = tolerance;
    return o;
  }
};

/// Command line, model and timing shared by every run record.
struct Record {
  json data;
  std::string path;

  void add(CLI::App* app) { app->add_option("--record", path, "write a JSON run record"); }

  void finish(double wall_time) {
    data["wall_time_seconds"] = wall_time;
    if (!path.empty()) write_file(path, data.dump(2) + "\n");
  }
};

std::string command_line;

json policy_json(const DeterministicPolicy& p) {
  return {{"actions", p.action_of}, {"successors", p.succ_of}, {"initial", p.init_of}};
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// ---------------------------------------------------------------------------
// generate

struct GenerateCmd {
  std::string family = "loadunload";
  int size = 8;
  double gamma = -1;
  double slip = 0.2;
  std::uint64_t layout_seed = 0;
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--family", family, "loadunload | maze")->check(CLI::IsMember({"loadunload", "maze"}));
    app->add_option("--size", size, "locations (loadunload) or corridor length (maze)");
    app->add_option("--gamma", gamma, "discount factor (family default when omitted)");
    app->add_option("--slip", slip, "maze slip probability");
    app->add_option("--layout-seed", layout_seed, "maze layout seed (odd values mirror the maze)");
    app->add_option("--out", out, "output .pomdp file (stdout when omitted)");
  }

  int run() const {
    const Pomdp m = make(family, size, gamma, slip, layout_seed);
    const std::string text = write_pomdp(m);
    if (out.empty()) std::cout << text;
    else write_file(out, text);
    std::cerr << family << " size " << size << ": |S| = " << m.num_states() << ", |O| = " << m.num_observations()
              << ", |A| = " << m.num_actions() << "\n";
    return kExitOk;
  }

  static Pomdp make(const std::string& family, int size, double gamma, double slip, std::uint64_t layout_seed) {
    if (family == "loadunload") {
      LoadUnloadSpec spec;
      spec.num_locations = size;
      if (gamma >= 0) spec.discount = gamma;
      return generate_load_unload(spec);
    }
    MazeSpec spec;
    spec.corridor_length = size;
    spec.slip_probability = slip;
    spec.layout_seed = layout_seed;
    if (gamma >= 0) spec.discount = gamma;
    return generate_maze(spec);
  }
};

// ---------------------------------------------------------------------------
// eval / simulate

struct EvalCmd {
  ModelArgs model;
  SolverArgs solver;
  Record record;
  std::string policy;
  bool values = false;
  bool direct = false;

  void add(CLI::App* app) {
    model.add(app);
    solver.add(app);
    record.add(app);
    app->add_option("--policy", policy, "policy-graph file")->required();
    app->add_flag("--values", values, "print V(n, s) for every node-state pair");
    app->add_flag("--direct", direct, "solve with a dense LU factorisation");
  }

  int run() {
    const auto start = std::chrono::steady_clock::now();
    const Pomdp m = model.load();
    const PolicyGraph g = read_policy_graph(read_file(policy));
    if (g.num_observations() != m.num_observations() || g.num_actions() != m.num_actions())
      throw UsageError("policy graph dimensions do not match the model");
    const CrossValue v = direct ? evaluate_direct(m, g) : evaluate(m, g, solver.options());
    std::cout << "criterion " << fmt(v.criterion) << "\n";
    if (values)
      for (Index n = 0; n < g.num_nodes(); ++n)
        for (Index s = 0; s < m.num_states(); ++s)
          std::cout << n << " " << s << " " << fmt(v.values[n * m.num_states() + s], 17) << "\n";
    record.data = {{"command", command_line},
                   {"model", model.path},
                   {"policy", policy},
                   {"criterion", v.criterion},
                   {"sweeps", v.stats.sweeps},
                   {"backup_ops", v.stats.backup_ops}};
    record.finish(seconds_since(start));
    return kExitOk;
  }
};

struct SimulateCmd {
  ModelArgs model;
  Record record;
  std::string policy;
  std::uint64_t rollouts = 100000;
  int horizon = 0;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    model.add(app);
    record.add(app);
    app->add_option("--policy", policy, "policy-graph file")->required();
    app->add_option("--rollouts", rollouts, "number of simulated runs");
    app->add_option("--horizon", horizon, "steps per run (0: truncation error below 1e-6)");
    app->add_option("--seed", seed, "random seed");
  }

  int run() {
    const auto start = std::chrono::steady_clock::now();
    const Pomdp m = model.load();
    const PolicyGraph g = read_policy_graph(read_file(policy));
    if (g.num_observations() != m.num_observations() || g.num_actions() != m.num_actions())
      throw UsageError("policy graph dimensions do not match the model");
    const int h = horizon > 0 ? horizon : default_horizon(m);
    const auto r = simulate(m, g, rollouts, h, seed);
    std::cout << "mean " << fmt(r.mean) << " stderr " << fmt(r.std_error) << " rollouts " << r.rollouts
              << " horizon " << r.horizon << "\n";
    record.data = {{"command", command_line}, {"model", model.path}, {"policy", policy}, {"seed", seed},
                   {"mean", r.mean},         {"std_error", r.std_error}, {"horizon", r.horizon}};
    record.finish(seconds_since(start));
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// solve-bnb / enumerate

struct SearchArgs {
  std::string order = "dfs";
  bool no_symmetry = false;
  bool no_prune = false;
  bool no_warm_start = false;
  bool no_reduction = false;
  std::string lower_bound = "root";
  std::string strategy = "heuristic";
  bool local_search = true;
  std::uint64_t seed = 0;
  std::uint64_t node_cap = 0;
  double time_cap = 0;

  void add(CLI::App* app) {
    app->add_option("--order", order, "dfs | best")->check(CLI::IsMember({"dfs", "best"}));
    app->add_flag("--no-symmetry", no_symmetry, "disable the node-ordering rule");
    app->add_flag("--no-prune", no_prune, "expand every partial policy");
    app->add_flag("--no-warm-start", no_warm_start, "solve every bound from zero");
    app->add_flag("--no-slot-reduction", no_reduction, "branch on slots that cannot change the value");
    app->add_option("--lower-bound", lower_bound, "none | root | every")
        ->check(CLI::IsMember({"none", "root", "every"}));
    app->add_option("--lb-strategy", strategy, "heuristic | random")->check(CLI::IsMember({"heuristic", "random"}));
    app->add_option("--local-search", local_search, "improve the root lower bound by one slot sweep");
    app->add_option("--seed", seed, "seed of the random lower bound");
    app->add_option("--node-cap", node_cap, "stop after this many expansions (0: none)");
    app->add_option("--time-cap", time_cap, "stop after this many seconds (0: none)");
  }

  SearchOptions options(const SolverOptions& solver) const {
    SearchOptions o;
    o.order = order == "best" ? SearchOrder::BestFirst : SearchOrder::DepthFirst;
    o.expand.symmetry = !no_symmetry;
    o.expand.reduce_irrelevant = !no_reduction;
    o.prune = !no_prune;
    o.warm_start = !no_warm_start;
    o.lower_bound_mode = lower_bound == "none"  ? LowerBoundMode::None
                         : lower_bound == "every" ? LowerBoundMode::EveryNode
                                                  : LowerBoundMode::Root;
    o.lower_bound.strategy = strategy == "random" ? LowerBoundStrategy::Random : LowerBoundStrategy::Heuristic;
    o.lower_bound.local_search = local_search;
    o.lower_bound.seed = seed;
    o.node_cap = node_cap;
    o.time_cap_seconds = time_cap;
    o.solver = solver;
    return o;
  }
};

json report_json(const SearchReport& r) {
  return {{"best_value", r.best_value},
          {"proven", r.proven},
          {"root_upper_bound", r.root_upper_bound},
          {"nodes_expanded", r.nodes_expanded},
          {"bound_solves", r.bound_solves},
          {"policy_evaluations", r.policy_evaluations},
          {"search_seconds", r.wall_time_seconds},
          {"policy", policy_json(r.best_policy)}};
}

void print_report(const SearchReport& r) {
  std::cout << "best_value " << fmt(r.best_value) << "\n"
            << "proven " << (r.proven ? "yes" : "no") << "\n"
            << "root_upper_bound " << fmt(r.root_upper_bound) << "\n"
            << "nodes_expanded " << r.nodes_expanded << "\n"
            << "bound_solves " << r.bound_solves << "\n"
            << "policy_evaluations " << r.policy_evaluations << "\n"
            << "wall_time " << fmt(r.wall_time_seconds, 6) << "\n";
}

struct SolveBnbCmd {
  ModelArgs model;
  GraphArgs graph;
  SolverArgs solver;
  SearchArgs search;
  Record record;
  std::string out;
  std::string trace;

  void add(CLI::App* app) {
    model.add(app);
    graph.add(app);
    solver.add(app);
    search.add(app);
    record.add(app);
    app->add_option("--out", out, "write the best policy graph here");
    app->add_option("--trace", trace, "write the expansion trace here");
  }

  int run() {
    const auto start = std::chrono::steady_clock::now();
    const Pomdp m = model.load();
    const ConstraintSet c = graph.build(m);
    SearchOptions opts = search.options(solver.options());
    opts.trace = !trace.empty();
    const SearchReport r = branch_and_bound(m, c, opts);
    print_report(r);
    if (!out.empty() && !r.best_policy.action_of.empty())
      write_file(out, write_policy_graph(as_stochastic(r.best_policy)));
    if (!trace.empty()) {
      std::string text = "depth\tslot\tchoice\tupper_bound\tincumbent\n";
      for (const auto& line : r.trace) text += line + "\n";
      write_file(trace, text);
    }
    record.data = report_json(r);
    record.data["command"] = command_line;
    record.data["model"] = model.path;
    record.data["nodes"] = c.num_nodes();
    record.data["seed"] = search.seed;
    record.finish(seconds_since(start));
    return r.proven ? kExitOk : kExitCap;
  }
};

struct EnumerateCmd {
  ModelArgs model;
  GraphArgs graph;
  SolverArgs solver;
  Record record;
  std::uint64_t cap = 1'000'000;
  bool symmetry = false;
  std::string out;

  void add(CLI::App* app) {
    model.add(app);
    graph.add(app);
    solver.add(app);
    record.add(app);
    app->add_option("--cap", cap, "refuse to enumerate more policies than this");
    app->add_flag("--symmetry", symmetry, "skip policies violating the node-ordering rule");
    app->add_option("--out", out, "write the best policy graph here");
  }

  int run() {
    const auto start = std::chrono::steady_clock::now();
    const Pomdp m = model.load();
    const ConstraintSet c = graph.build(m);
    EnumerateOptions opts;
    opts.cap = cap;
    opts.symmetry = symmetry;
    opts.solver = solver.options();
    const SearchReport r = enumerate_all(m, c, opts);
    std::cout << "best_value " << fmt(r.best_value) << "\n"
              << "policies " << r.nodes_expanded << "\n"
              << "wall_time " << fmt(r.wall_time_seconds, 6) << "\n";
    if (!out.empty()) write_file(out, write_policy_graph(as_stochastic(r.best_policy)));
    record.data = {{"command", command_line}, {"model", model.path},       {"nodes", c.num_nodes()},
                   {"best_value", r.best_value}, {"policies", r.nodes_expanded},
                   {"policy", policy_json(r.best_policy)}};
    record.finish(seconds_since(start));
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// solve-grad

struct GradArgs {
  double step = 1.0;
  int max_iterations = 2000;
  double reference = 0;
  bool has_reference = false;
  double target_fraction = 0.99;
  bool free_start = false;
  bool random_init = false;
  bool stop_at_face = false;
  std::string method = "auto";
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--step", step, "step size β")->check(CLI::PositiveNumber);
    app->add_option("--max-iterations", max_iterations, "iteration cap");
    app->add_option("--reference", reference, "known optimum; stop at target-fraction of it");
    app->add_option("--target-fraction", target_fraction, "fraction of the reference to reach");
    app->add_flag("--free-start", free_start, "optimise the initial-node distribution too");
    app->add_flag("--random-init", random_init, "start from a random interior graph");
    app->add_flag("--stop-at-face", stop_at_face, "end each step at the first simplex face");
    app->add_option("--method", method, "auto | matrix | vector")->check(CLI::IsMember({"auto", "matrix", "vector"}));
    app->add_option("--seed", seed, "seed of the random initial graph");
  }

  AscentConfig config(const SolverOptions& solver, bool reference_given) const {
    AscentConfig c;
    c.step_size = step;
    c.max_iterations = max_iterations;
    if (reference_given) c.reference = reference;
    c.target_fraction = target_fraction;
    c.free_start = free_start;
    c.random_init = random_init;
    c.walk_faces = !stop_at_face;
    c.method = method == "matrix" ? GradientMethod::Matrix
               : method == "vector" ? GradientMethod::Vectorwise
                                    : GradientMethod::Auto;
    c.seed = seed;
    c.solver = solver;
    return c;
  }
};

struct SolveGradCmd {
  ModelArgs model;
  GraphArgs graph;
  SolverArgs solver;
  GradArgs grad;
  Record record;
  std::string out;
  std::string csv;
  CLI::Option* reference_opt = nullptr;

  void add(CLI::App* app) {
    model.add(app);
    graph.add(app);
    solver.add(app);
    grad.add(app);
    record.add(app);
    reference_opt = app->get_option("--reference");
    app->add_option("--out", out, "write the best stochastic graph here");
    app->add_option("--csv", csv, "write the iteration history here");
  }

  int run() {
    const auto start = std::chrono::steady_clock::now();
    const Pomdp m = model.load();
    const ConstraintSet c = graph.build(m);
    const AscentResult r = gradient_ascent(m, c, grad.config(solver.options(), reference_opt->count() > 0));
    std::cout << "best_value " << fmt(r.best_value) << "\n"
              << "iterations " << r.history.back().iteration << "\n"
              << "reached_target " << (r.reached_target ? "yes" : "no") << "\n"
              << "step_halvings " << r.step_halvings << "\n";
    if (!out.empty()) write_file(out, write_policy_graph(r.best_graph));
    if (!csv.empty()) write_file(csv, history_csv(r.history));
    record.data = {{"command", command_line},       {"model", model.path},
                   {"nodes", c.num_nodes()},        {"seed", grad.seed},
                   {"best_value", r.best_value},    {"iterations", r.history.back().iteration},
                   {"reached_target", r.reached_target}, {"step_halvings", r.step_halvings}};
    record.finish(seconds_since(start));
    return kExitOk;
  }
};

// ---------------------------------------------------------------------------
// bench

struct BenchCmd {
  std::string family = "loadunload";
  std::vector<int> sizes{2, 3, 4, 5, 6, 7, 8};
  std::vector<std::string> algorithms{"bnb-df", "grad"};
  int seeds = 10;
  bool fifty = false;
  int nodes = 2;
  double gamma = -1;
  double slip = 0.2;
  std::vector<double> betas{0.1, 0.3, 1, 3, 10};
  int max_iterations = 2000;
  std::uint64_t node_cap = 0;
  double time_cap = 0;
  std::string csv;
  SolverArgs solver;

  void add(CLI::App* app) {
    app->add_option("--family", family, "loadunload | maze")->check(CLI::IsMember({"loadunload", "maze"}));
    app->add_option("--sizes", sizes, "family sizes")->delimiter(',');
    app->add_option("--algorithms", algorithms, "bnb-df, bnb-bf, grad (empty: header only)")
        ->delimiter(',')
        ->expected(0, -1);
    app->add_option("--seeds", seeds, "seeds per row");
    app->add_flag("--fifty-seeds", fifty, "use 50 seeds per row");
    app->add_option("--nodes", nodes, "policy-graph nodes");
    app->add_option("--gamma", gamma, "discount factor (family default when omitted)");
    app->add_option("--slip", slip, "maze slip probability");
    app->add_option("--betas", betas, "step sizes tried for grad")->delimiter(',');
    app->add_option("--max-iterations", max_iterations, "grad iteration cap");
    app->add_option("--node-cap", node_cap, "bnb expansion cap (0: none)");
    app->add_option("--time-cap", time_cap, "bnb time cap in seconds (0: none)");
    app->add_option("--csv", csv, "output CSV (stdout when omitted)")->required(false);
    solver.add(app);
  }

  int run() {
    std::ostringstream out;
    out << "# pgraph-bench v1\n"
        << "family,size,num_states,algorithm,seed,wall_time_s,value,proven,nodes_expanded,bound_solves,"
           "iterations,step_size,error\n";
    const int num_seeds = fifty ? 50 : seeds;
    for (const int size : sizes) {
      std::optional<Pomdp> model;
      std::string build_error;
      try {
        model = GenerateCmd::make(family, size, gamma, slip, 0);
      } catch (const std::exception& e) {
        build_error = e.what();
      }
      std::optional<Scalar> reference;
      for (const auto& alg : algorithms) {
        for (int seed = 0; seed < num_seeds; ++seed) {
          out << family << "," << size << "," << (model ? model->num_states() : 0) << "," << alg << "," << seed
              << ",";
          if (!model) {
            out << ",,,,,,," << quote(build_error) << "\n";
            continue;
          }
          try {
            out << row(*model, alg, static_cast<std::uint64_t>(seed), reference) << "\n";
          } catch (const std::exception& e) {
            out << ",,,,,,," << quote(e.what()) << "\n";
          }
          out.flush();
        }
      }
    }
    if (csv.empty()) std::cout << out.str();
    else write_file(csv, out.str());
    return kExitOk;
  }

  static std::string quote(const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  std::string row(const Pomdp& m, const std::string& alg, std::uint64_t seed, std::optional<Scalar>& reference) {
    const ConstraintSet c = ConstraintSet::unconstrained(nodes, m.num_observations(), m.num_actions());
    std::ostringstream r;
    if (alg == "bnb-df" || alg == "bnb-bf") {
      SearchOptions o;
      o.order = alg == "bnb-bf" ? SearchOrder::BestFirst : SearchOrder::DepthFirst;
      o.lower_bound.seed = seed;
      o.node_cap = node_cap;
      o.time_cap_seconds = time_cap;
      o.solver = solver.options();
      const auto rep = branch_and_bound(m, c, o);
      if (rep.proven) reference = rep.best_value;
      r << fmt(rep.wall_time_seconds, 6) << "," << fmt(rep.best_value, 17) << "," << (rep.proven ? 1 : 0) << ","
        << rep.nodes_expanded << "," << rep.bound_solves << ",,,";
      return r.str();
    }
    if (alg == "grad") {
      // Each β is a full run; the row reports the run that reached the best
      // value (fewest iterations on ties).
      std::optional<AscentResult> best;
      double best_beta = 0, best_time = 0;
      for (double beta : betas) {
        AscentConfig cfg;
        cfg.step_size = beta;
        cfg.max_iterations = max_iterations;
        cfg.reference = reference;
        cfg.seed = seed;
        cfg.random_init = seed > 0;
        cfg.solver = solver.options();
        const auto t0 = std::chrono::steady_clock::now();
        auto res = gradient_ascent(m, c, cfg);
        const double t = seconds_since(t0);
        const bool better = !best || res.best_value > best->best_value + 1e-12 ||
                            (std::abs(res.best_value - best->best_value) <= 1e-12 &&
                             res.history.size() < best->history.size());
        if (better) {
          best = std::move(res);
          best_beta = beta;
          best_time = t;
        }
      }
      r << fmt(best_time, 6) << "," << fmt(best->best_value, 17) << ",," << ",," << best->history.back().iteration
        << "," << fmt(best_beta) << ",";
      return r.str();
    }
    throw UsageError("unknown algorithm '" + alg + "'");
  }
};

}  // namespace

int main(int argc, char** argv) {
  for (int i = 0; i < argc; ++i) command_line += (i ? " " : "") + std::string(argv[i]);

  CLI::App app{"Policy-graph search for POMDPs"};
  app.require_subcommand(1);
  GenerateCmd generate;
  EvalCmd eval;
  SimulateCmd simulate_cmd;
  SolveBnbCmd bnb;
  SolveGradCmd grad;
  EnumerateCmd enumerate;
  BenchCmd bench;
  auto* generate_app = app.add_subcommand("generate", "write a benchmark model");
  auto* eval_app = app.add_subcommand("eval", "evaluate a policy graph");
  auto* simulate_app = app.add_subcommand("simulate", "Monte-Carlo estimate of a policy graph's value");
  auto* bnb_app = app.add_subcommand("solve-bnb", "branch-and-bound over deterministic graphs");
  auto* grad_app = app.add_subcommand("solve-grad", "projected gradient ascent over stochastic graphs");
  auto* enumerate_app = app.add_subcommand("enumerate", "evaluate every deterministic graph");
  auto* bench_app = app.add_subcommand("bench", "scaling benchmark CSV");
  generate.add(generate_app);
  eval.add(eval_app);
  simulate_cmd.add(simulate_app);
  bnb.add(bnb_app);
  grad.add(grad_app);
  enumerate.add(enumerate_app);
  bench.add(bench_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*generate_app) return generate.run();
    if (*eval_app) return eval.run();
    if (*simulate_app) return simulate_cmd.run();
    if (*bnb_app) return bnb.run();
    if (*grad_app) return grad.run();
    if (*enumerate_app) return enumerate.run();
    if (*bench_app) return bench.run();
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const CapExceeded& e) {
    std::cerr << "cap reached: " << e.what() << "\n";
    return kExitCap;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
