#include "sbmvi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "sbmvi/baselines.hpp"
#include "sbmvi/error.hpp"
#include "sbmvi/metrics.hpp"
#include "sbmvi/pairing.hpp"
#include "sbmvi/random.hpp"
#include "sbmvi/svg.hpp"
#include "sbmvi/vips.hpp"
#include "sbmvi/vips_general.hpp"

namespace sbmvi {

using nlohmann::json;

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::Heatmap: return "heatmap";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::General: return "general";
    case ExperimentKind::Ablation: return "ablation";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  for (auto kind : {ExperimentKind::Convergence, ExperimentKind::Heatmap, ExperimentKind::Sweep,
                    ExperimentKind::General, ExperimentKind::Ablation})
    if (name == to_string(kind)) return kind;
  fail(ErrorCode::InvalidConfig, "unknown experiment kind '" + name + "'");
}

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = std::round((lo + i * step) * 1e9) / 1e9;
    if (v > hi + 1e-12) break;
    out.push_back(v);
  }
  return out;
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Dense: return "dense";
    case Backend::Sparse: return "sparse";
    default: return "auto";
  }
}

Backend parse_backend(const std::string& s) {
  if (s == "auto") return Backend::Auto;
  if (s == "dense") return Backend::Dense;
  if (s == "sparse") return Backend::Sparse;
  fail(ErrorCode::InvalidConfig, "unknown backend '" + s + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Convergence:
      c.n = 3000;
      c.p = 0.2;
      c.q = 0.01;
      c.algorithms = {"vips", "mfvi"};
      c.mus = {0.1, 0.5, 0.9};
      break;
    case ExperimentKind::Heatmap:
      c.n = 2000;
      c.p = 0.2;
      c.q = 0.1;
      c.algorithms = {"vips", "mfvi"};
      c.p_grid = grid(0.025, 0.4, 0.025);
      c.q_grid = c.p_grid;
      break;
    case ExperimentKind::Sweep:
      c.n = 2000;
      c.algorithms = {"vips", "mfvi", "bp", "spectral"};
      c.ratios = {1, 1.5, 2, 3, 4, 5, 6, 8};
      c.degrees = {10, 20, 30, 50, 70, 100};
      c.degree = 70;
      c.ratio = 2;
      break;
    case ExperimentKind::General:
      c.n = 2000;
      c.pi = 0.3;
      c.degree = 50;
      c.p = 0.5;
      c.q = 0.01;
      c.algorithms = {"vips", "mfvi", "bp", "spectral"};
      c.ratios = {2, 3, 4, 6, 8, 10};
      break;
    case ExperimentKind::Ablation:
      c.n = 2000;
      c.p = 0.1;
      c.q = 0.02;
      c.trials = 50;
      c.algorithms = {"vips", "mfvi"};
      c.mus = {0.1, 0.5, 0.9};
      c.schemes = {"true", "estimate", "update"};
      break;
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text, ExperimentConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("config JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::InvalidConfig, "config must be a flat JSON object");
  try {
    if (j.contains("kind")) {
      const auto kind = parse_experiment_kind(j["kind"].get<std::string>());
      if (kind != c.kind) c = defaults(kind);
    }
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j[key].get_to(field);
    };
    get("seed", c.seed);
    get("workers", c.workers);
    get("out", c.out);
    get("n", c.n);
    get("k", c.k);
    get("p", c.p);
    get("q", c.q);
    get("pi", c.pi);
    get("trials", c.trials);
    get("algorithms", c.algorithms);
    if (j.contains("backend")) c.backend = parse_backend(j["backend"].get<std::string>());
    get("mus", c.mus);
    get("ticks", c.ticks);
    get("schemes", c.schemes);
    get("p_grid", c.p_grid);
    get("q_grid", c.q_grid);
    get("sweep", c.sweep);
    get("ratios", c.ratios);
    get("degrees", c.degrees);
    get("degree", c.degree);
    get("ratio", c.ratio);
    get("general", c.general);
    get("max_meta_iters", c.max_meta_iters);
    get("max_iters", c.max_iters);
    get("tol", c.tol);
    static const char* const known[] = {
        "kind",    "seed",   "workers", "out",    "n",      "k",       "p",
        "q",       "pi",     "trials",  "algorithms", "backend", "mus", "ticks",
        "schemes", "p_grid", "q_grid",  "sweep",  "ratios", "degrees", "degree",
        "ratio",   "general", "max_meta_iters", "max_iters", "tol"};
    for (const auto& item : j.items())
      require(std::find(std::begin(known), std::end(known), item.key()) != std::end(known),
              ErrorCode::InvalidConfig, "unknown config key '" + item.key() + "'");
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidConfig, std::string("config JSON: ") + e.what());
  }
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j{{"kind", to_string(kind)},
         {"seed", seed},
         {"workers", workers},
         {"out", out},
         {"n", n},
         {"k", k},
         {"p", p},
         {"q", q},
         {"pi", pi},
         {"trials", trials},
         {"algorithms", algorithms},
         {"backend", backend_name(backend)},
         {"mus", mus},
         {"ticks", ticks},
         {"schemes", schemes},
         {"p_grid", p_grid},
         {"q_grid", q_grid},
         {"sweep", sweep},
         {"ratios", ratios},
         {"degrees", degrees},
         {"degree", degree},
         {"ratio", ratio},
         {"general", general},
         {"max_meta_iters", max_meta_iters},
         {"max_iters", max_iters},
         {"tol", tol}};
  return j.dump();
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::InvalidConfig, msg); };
  check(trials >= 1, "trials must be >= 1");
  check(workers >= 1, "workers must be >= 1");
  check(n >= 2, "n must be at least 2");
  check(k >= 2 && k <= 6, "K must lie in [2, 6]");
  check(pi > 0.0 && pi < 1.0, "pi must lie in (0,1)");
  check(tol > 0.0 && max_meta_iters >= 1 && max_iters >= 1, "invalid iteration limits");
  check(!algorithms.empty(), "algorithm list is empty");
  for (const auto& a : algorithms)
    check(a == "vips" || a == "mfvi" || a == "bp" || a == "spectral",
          "unknown algorithm '" + a + "'");
  auto probability = [&](double v, const char* what) {
    check(v > 0.0 && v < 1.0, std::string(what) + " must lie in (0,1)");
  };
  switch (kind) {
    case ExperimentKind::Convergence:
    case ExperimentKind::Ablation:
      check(!mus.empty(), "mus grid is empty");
      for (double mu : mus) check(mu >= 0.0 && mu <= 1.0, "mu must lie in [0,1]");
      check(ticks >= 1, "ticks must be >= 1");
      probability(p, "p");
      probability(q, "q");
      check(n % 2 == 0, "VIPS needs an even node count");
      for (const auto& a : algorithms)
        check(a == "vips" || a == "mfvi", "only vips and mfvi record trajectories");
      if (kind == ExperimentKind::Ablation) {
        check(!schemes.empty(), "scheme list is empty");
        for (const auto& s : schemes)
          check(s == "true" || s == "estimate" || s == "update", "unknown scheme '" + s + "'");
      }
      break;
    case ExperimentKind::Heatmap:
      check(!p_grid.empty() && !q_grid.empty(), "heatmap grids must be non-empty");
      for (double v : p_grid) probability(v, "p_grid entry");
      for (double v : q_grid) probability(v, "q_grid entry");
      probability(p, "p");
      probability(q, "q");
      check(n % 2 == 0, "VIPS needs an even node count");
      break;
    case ExperimentKind::Sweep:
      check(sweep == "ratio" || sweep == "degree", "sweep must be 'ratio' or 'degree'");
      check(!(sweep == "ratio" ? ratios : degrees).empty(), "sweep grid is empty");
      for (double r : ratios) check(r >= 1.0, "ratios must be >= 1");
      for (double d : degrees) check(d > 0.0, "degrees must be positive");
      check(n % 2 == 0, "VIPS needs an even node count");
      break;
    case ExperimentKind::General:
      check(general == "unbalanced" || general == "k3" || general == "raster",
            "general must be 'unbalanced', 'k3' or 'raster'");
      if (general == "raster") {
        probability(p, "p");
        probability(q, "q");
      } else {
        check(!ratios.empty(), "ratio grid is empty");
      }
      check(n % 2 == 0, "VIPS needs an even node count");
      break;
  }
}

PlantedParameters planted_from_degree(std::size_t n, const std::vector<double>& pi,
                                      double degree, double ratio) {
  require(ratio >= 1.0 && degree > 0.0 && n > 0, ErrorCode::InvalidConfig,
          "degree must be positive and ratio >= 1");
  double s = 0.0;
  for (double v : pi) s += v * v;
  const double q = degree / (static_cast<double>(n) * (s * ratio + 1.0 - s));
  const double p = ratio * q;
  require(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0, ErrorCode::InvalidConfig,
          "degree and ratio give probabilities outside (0,1)");
  return {p, q};
}

std::string key_value(const std::string& name, double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s=%g", name.c_str(), value);
  return buf;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = "experiment,algorithm,trial,iteration,metric,value\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.value);
    out += r.experiment;
    out += ',';
    out += r.algorithm;
    out += ',';
    out += std::to_string(r.trial);
    out += ',';
    out += std::to_string(r.iteration);
    out += ',';
    out += r.metric;
    out += ',';
    out += buf;
    out += '\n';
  }
  return out;
}

std::vector<double> trial_values(const std::vector<ResultRow>& rows,
                                 const std::string& experiment, const std::string& algorithm,
                                 const std::string& metric, int iteration) {
  std::map<int, std::pair<int, double>> by_trial;
  for (const auto& r : rows) {
    if (r.experiment != experiment || r.algorithm != algorithm || r.metric != metric) continue;
    if (iteration >= 0) {
      if (r.iteration == iteration) by_trial[r.trial] = {r.iteration, r.value};
    } else {
      auto it = by_trial.find(r.trial);
      if (it == by_trial.end() || r.iteration >= it->second.first)
        by_trial[r.trial] = {r.iteration, r.value};
    }
  }
  std::vector<double> out;
  out.reserve(by_trial.size());
  for (const auto& [trial, v] : by_trial) out.push_back(v.second);
  return out;
}

namespace {

// ---- trial execution -------------------------------------------------------

struct LabelRecord {
  std::string experiment;
  std::string algorithm;
  int trial = 0;
  std::vector<int> labels;
};

struct TaskOutput {
  std::vector<ResultRow> rows;
  std::vector<LabelRecord> labels;
  std::vector<std::string> warnings;
};

using Task = std::function<TaskOutput()>;

std::vector<TaskOutput> run_tasks(const std::vector<Task>& tasks, int workers) {
  std::vector<TaskOutput> out(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        out[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, workers));
  if (count == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(count, tasks.size()); ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Everything an algorithm needs for one trial.
struct TrialSpec {
  const Graph* graph = nullptr;
  std::uint64_t seed = 0;
  int k = 2;
  std::vector<double> pi;  // label-indexed class probabilities
  double p_true = 0.0, q_true = 0.0;
  double p_hat = 0.0, q_hat = 0.0;
  bool update = false;
  double mu = 0.5;  // Bernoulli mean for K = 2 inits
  int max_meta_iters = 100;
  int max_iters = 300;
  double tol = 1e-6;
  bool run_to_max = false;
};

struct TrialOutcome {
  std::vector<int> labels;
  std::vector<double> l1_ticks;  // per tick, VIPS and MFVI only
  double l1 = kNaN;
  double nmi = 0.0;
  double p_hat = kNaN, q_hat = kNaN;
  int iterations = 0;
  std::vector<std::string> warnings;
};

std::vector<double> one_hot(const std::vector<int>& labels, int k) {
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> out(labels.size() * kk, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) out[i * kk + static_cast<std::size_t>(labels[i])] = 1.0;
  return out;
}

double hard_l1(const std::vector<int>& labels, const Graph& g, int k) {
  if (k == 2) {
    std::vector<double> u(labels.begin(), labels.end());
    return l1_to_truth(u, g.labels());
  }
  return l1_to_truth_general(one_hot(labels, k), g.labels(), k);
}

std::vector<double> ticks_l1(const TrialRecord& record) {
  std::vector<double> out;
  for (const auto& it : record.iterations) out.push_back(it.l1);
  return out;
}

// Node-order initial memberships shared by VIPS and MFVI within a trial.
std::vector<double> initial_memberships(const TrialSpec& s) {
  const std::size_t n = s.graph->n();
  const auto seed = derive_seed(s.seed, "init", 0);
  if (s.k == 2) return InitSpec::bernoulli(s.mu).draw(n, seed);
  return GeneralInitSpec::dirichlet(1.0).draw(n, s.k, seed);
}

std::vector<double> rows_to_pair_order(const std::vector<double>& u, const Pairing& pairing,
                                       int k) {
  const auto kk = static_cast<std::size_t>(k);
  const std::size_t m = pairing.m();
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < kk; ++a) {
      out[i * kk + a] = u[pairing.p1()[i] * kk + a];
      out[(m + i) * kk + a] = u[pairing.p2()[i] * kk + a];
    }
  return out;
}

TrialOutcome run_algorithm(const std::string& algorithm, const TrialSpec& s) {
  const Graph& g = *s.graph;
  TrialOutcome out;
  if (algorithm == "vips") {
    const Pairing pairing = random_pairing(g.n(), derive_seed(s.seed, "pairing", 0));
    const auto u0 = initial_memberships(s);
    if (s.k == 2) {
      VipsConfig c;
      c.p_hat = s.p_hat;
      c.q_hat = s.q_hat;
      c.pi = s.pi[1];
      c.update_params = s.update;
      c.max_meta_iters = s.max_meta_iters;
      c.tol = s.tol;
      c.run_to_max = s.run_to_max;
      c.record_elbo = false;
      c.init = InitSpec::explicit_vector(pairing.to_pair_order(u0));
      auto run = run_vips(g, pairing, c, s.seed);
      out.labels = hard_labels(run.u_nodes);
      out.l1 = l1_to_truth(run.u_nodes, g.labels());
      out.l1_ticks = ticks_l1(run.record);
      out.p_hat = run.p_hat;
      out.q_hat = run.q_hat;
      out.iterations = 3 * run.meta_iterations;
      out.warnings = run.record.warnings;
    } else {
      GeneralVipsConfig c;
      c.k = s.k;
      c.pi = s.pi;
      c.p_hat = s.p_hat;
      c.q_hat = s.q_hat;
      c.max_meta_iters = s.max_meta_iters;
      c.tol = s.tol;
      c.run_to_max = s.run_to_max;
      c.init = GeneralInitSpec::explicit_matrix(rows_to_pair_order(u0, pairing, s.k));
      auto run = run_vips_general(g, pairing, c, s.seed);
      out.labels = run.labels;
      out.l1 = l1_to_truth_general(run.u_nodes, g.labels(), s.k);
      out.l1_ticks = ticks_l1(run.record);
      out.p_hat = s.p_hat;
      out.q_hat = s.q_hat;
      out.iterations = 3 * run.meta_iterations;
    }
  } else if (algorithm == "mfvi") {
    MfviConfig c;
    c.k = s.k;
    c.pi = s.pi;
    c.p_hat = s.p_hat;
    c.q_hat = s.q_hat;
    c.update_params = s.update;
    c.max_iters = s.max_iters;
    c.tol = s.tol;
    c.run_to_max = s.run_to_max;
    const auto u0 = initial_memberships(s);
    if (s.k == 2)
      c.init = InitSpec::explicit_vector(u0);
    else
      c.general_init = GeneralInitSpec::explicit_matrix(u0);
    auto run = run_mfvi(g, c, s.seed);
    out.labels = run.labels;
    out.l1 = s.k == 2 ? l1_to_truth(run.u, g.labels())
                      : l1_to_truth_general(run.u, g.labels(), s.k);
    out.l1_ticks = ticks_l1(run.record);
    out.p_hat = run.p_hat;
    out.q_hat = run.q_hat;
    out.iterations = run.iterations;
  } else if (algorithm == "bp") {
    auto run = run_bp(g, s.p_true, s.q_true, s.pi, s.k, BpConfig{}, derive_seed(s.seed, "bp", 0));
    out.labels = run.labels;
    out.l1 = hard_l1(run.labels, g, s.k);
    out.iterations = run.iterations;
    out.warnings = run.record.warnings;
  } else if (algorithm == "spectral") {
    auto run = spectral_cluster(g, s.k, derive_seed(s.seed, "spectral", 0));
    out.labels = run.labels;
    out.l1 = hard_l1(run.labels, g, s.k);
    out.iterations = run.iterations;
    if (!run.converged) out.warnings.push_back("power iteration hit its iteration cap");
  } else {
    fail(ErrorCode::InvalidConfig, "unknown algorithm '" + algorithm + "'");
  }
  out.nmi = nmi(out.labels, g.labels());
  return out;
}

// Final-state rows shared by the heatmap, sweep and general experiments.
void push_final_rows(TaskOutput& task, const std::string& experiment,
                     const std::string& algorithm, int trial, const TrialOutcome& o,
                     const Graph& g, int k) {
  auto push = [&](const char* metric, double v) {
    if (std::isfinite(v)) task.rows.push_back({experiment, algorithm, trial, o.iterations, metric, v});
  };
  push("nmi", o.nmi);
  push("l1", o.l1);
  push("exact", exact_recovery(o.labels, g.labels(), k) ? 1.0 : 0.0);
  push("p_hat", o.p_hat);
  push("q_hat", o.q_hat);
  for (const auto& w : o.warnings)
    task.warnings.push_back(experiment + " " + algorithm + " trial " + std::to_string(trial) +
                            ": " + w);
}

// Pads or truncates a trajectory to exactly `ticks` rows of metric l1.
void push_trajectory(TaskOutput& task, const std::string& experiment,
                     const std::string& algorithm, int trial, const std::vector<double>& l1,
                     int ticks) {
  for (int t = 0; t < ticks; ++t) {
    const auto idx = std::min(static_cast<std::size_t>(t), l1.size() - 1);
    task.rows.push_back({experiment, algorithm, trial, t, "l1", l1[idx]});
  }
}

std::vector<double> class_probabilities(int k, double pi) {
  if (k == 2) return {1.0 - pi, pi};
  return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
}

SbmConfig graph_config(std::size_t n, int k, double p, double q, double pi, Backend backend) {
  SbmConfig c;
  if (k == 2) {
    const bool balanced = pi == 0.5;
    c = SbmConfig::two_class(n, p, q, pi,
                             balanced ? AssignmentMode::ExactBalanced : AssignmentMode::Multinomial);
  } else {
    c = SbmConfig::planted(n, k, p, q,
                           n % static_cast<std::size_t>(k) == 0 ? AssignmentMode::ExactBalanced
                                                                : AssignmentMode::Multinomial);
  }
  c.backend = backend;
  return c;
}

// ---- aggregation -----------------------------------------------------------

struct Stats {
  double mean = kNaN, sd = kNaN;
  std::size_t count = 0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  s.count = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

json summary_groups(const std::vector<ResultRow>& rows) {
  // (experiment, algorithm, metric) in first-appearance order.
  std::vector<std::tuple<std::string, std::string, std::string>> keys;
  std::map<std::tuple<std::string, std::string, std::string>, bool> seen;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.experiment, r.algorithm, r.metric);
    if (!seen[key]) {
      seen[key] = true;
      keys.push_back(key);
    }
  }
  json groups = json::array();
  for (const auto& [e, a, m] : keys) {
    const auto s = stats(trial_values(rows, e, a, m));
    groups.push_back({{"experiment", e},
                      {"algorithm", a},
                      {"metric", m},
                      {"trials", s.count},
                      {"mean", s.mean},
                      {"sd", s.sd}});
  }
  return groups;
}

svg::Series trajectory_series(const std::vector<ResultRow>& rows, const std::string& experiment,
                              const std::string& algorithm, const std::string& label,
                              int ticks) {
  svg::Series s;
  s.label = label;
  for (int t = 0; t < ticks; ++t) {
    const auto st = stats(trial_values(rows, experiment, algorithm, "l1", t));
    s.x.push_back(t);
    s.mean.push_back(st.mean);
    s.sd.push_back(st.sd);
  }
  return s;
}

// ---- experiments -----------------------------------------------------------

struct Plan {
  std::vector<Task> tasks;
  std::vector<Graph> graphs;  // shared, read-only during execution
};

void convergence_like(const ExperimentConfig& c, ExperimentResult& result) {
  const bool ablation = c.kind == ExperimentKind::Ablation;
  const std::string prefix = to_string(c.kind);
  const Graph graph =
      generate_sbm(graph_config(c.n, 2, c.p, c.q, 0.5, c.backend), derive_seed(c.seed, "graph", 0));
  const std::vector<std::string> schemes =
      ablation ? c.schemes : std::vector<std::string>{"true"};
  const double density = graph.density();

  struct Arm {
    std::string experiment;
    std::string scheme;
    double mu;
  };
  std::vector<Arm> arms;
  for (const auto& scheme : schemes)
    for (double mu : c.mus)
      arms.push_back({ablation ? prefix + "/scheme=" + scheme + "/" + key_value("mu", mu)
                               : prefix + "/" + key_value("mu", mu),
                      scheme, mu});

  std::vector<Task> tasks;
  for (const auto& arm : arms)
    for (int trial = 0; trial < c.trials; ++trial)
      tasks.push_back([&, arm, trial] {
        TrialSpec s;
        s.graph = &graph;
        s.seed = derive_seed(c.seed, arm.experiment, static_cast<std::uint64_t>(trial));
        s.pi = {0.5, 0.5};
        s.p_true = c.p;
        s.q_true = c.q;
        s.p_hat = arm.scheme == "true" ? c.p : density;
        s.q_hat = arm.scheme == "true" ? c.q : density / 2.0;
        s.update = arm.scheme == "update";
        s.mu = arm.mu;
        s.max_meta_iters = c.max_meta_iters;
        s.max_iters = c.max_iters;
        s.tol = c.tol;
        TaskOutput out;
        for (const auto& algorithm : c.algorithms) {
          // The ablation compares update schemes for VIPS; MFVI only joins
          // the update arm.
          if (ablation && algorithm == "mfvi" && arm.scheme != "update") continue;
          const auto o = run_algorithm(algorithm, s);
          push_trajectory(out, arm.experiment, algorithm, trial, o.l1_ticks, c.ticks);
          for (const auto& w : o.warnings)
            out.warnings.push_back(arm.experiment + " " + algorithm + " trial " +
                                   std::to_string(trial) + ": " + w);
        }
        return out;
      });
  for (auto& t : run_tasks(tasks, c.workers)) {
    result.rows.insert(result.rows.end(), t.rows.begin(), t.rows.end());
    result.warnings.insert(result.warnings.end(), t.warnings.begin(), t.warnings.end());
  }

  std::vector<std::string> panels;
  for (double mu : c.mus) {
    svg::LineChart chart;
    chart.title = key_value("mu", mu);
    chart.x_label = "iteration";
    chart.y_label = "l1 distance to truth";
    for (const auto& scheme : schemes)
      for (const auto& algorithm : c.algorithms) {
        if (ablation && algorithm == "mfvi" && scheme != "update") continue;
        const std::string e = ablation
                                  ? prefix + "/scheme=" + scheme + "/" + key_value("mu", mu)
                                  : prefix + "/" + key_value("mu", mu);
        chart.series.push_back(trajectory_series(result.rows, e, algorithm,
                                                 ablation ? algorithm + " " + scheme : algorithm,
                                                 c.ticks));
      }
    panels.push_back(svg::render_lines(chart));
  }
  result.charts.push_back({prefix + ".svg", svg::render_panels(panels, 480, 320)});
}

void heatmap(const ExperimentConfig& c, ExperimentResult& result) {
  const auto pi = class_probabilities(c.k, c.pi);
  const Graph graph = generate_sbm(graph_config(c.n, c.k, c.p, c.q, c.pi, c.backend),
                                   derive_seed(c.seed, "graph", 0));
  std::vector<Task> tasks;
  for (double ph : c.p_grid)
    for (double qh : c.q_grid) {
      if (!(qh < ph)) continue;
      const std::string e = "heatmap/" + key_value("p_hat", ph) + "/" + key_value("q_hat", qh);
      for (int trial = 0; trial < c.trials; ++trial)
        tasks.push_back([&, e, ph, qh, trial] {
          TrialSpec s;
          s.graph = &graph;
          s.seed = derive_seed(c.seed, e, static_cast<std::uint64_t>(trial));
          s.k = c.k;
          s.pi = pi;
          s.p_true = c.p;
          s.q_true = c.q;
          s.p_hat = ph;
          s.q_hat = qh;
          s.max_meta_iters = c.max_meta_iters;
          s.max_iters = c.max_iters;
          s.tol = c.tol;
          TaskOutput out;
          for (const auto& algorithm : c.algorithms)
            push_final_rows(out, e, algorithm, trial, run_algorithm(algorithm, s), graph, c.k);
          return out;
        });
    }
  for (auto& t : run_tasks(tasks, c.workers)) {
    result.rows.insert(result.rows.end(), t.rows.begin(), t.rows.end());
    result.warnings.insert(result.warnings.end(), t.warnings.begin(), t.warnings.end());
  }
  for (const auto& algorithm : c.algorithms) {
    svg::Heatmap map;
    map.title = algorithm + " mean NMI";
    map.x_label = "p_hat";
    map.y_label = "q_hat";
    map.x_ticks = c.p_grid;
    map.y_ticks = c.q_grid;
    for (double qh : c.q_grid)
      for (double ph : c.p_grid) {
        const std::string e = "heatmap/" + key_value("p_hat", ph) + "/" + key_value("q_hat", qh);
        map.values.push_back(qh < ph ? stats(trial_values(result.rows, e, algorithm, "nmi")).mean
                                     : kNaN);
      }
    result.charts.push_back({"heatmap_" + algorithm + ".svg", svg::render_heatmap(map)});
  }
}

// Sweep and the unbalanced / K = 3 general experiments: one fresh graph per
// trial and grid point, true parameters for BP, final NMI per algorithm.
void sweep_like(const ExperimentConfig& c, ExperimentResult& result) {
  const bool general = c.kind == ExperimentKind::General;
  const int k = general && c.general == "k3" ? 3 : (general ? 2 : c.k);
  const double pi_label1 = general && c.general == "unbalanced" ? c.pi : 0.5;
  const auto pi = class_probabilities(k, pi_label1);
  const bool by_degree = !general && c.sweep == "degree";
  const auto& points = by_degree ? c.degrees : c.ratios;
  const std::string prefix =
      general ? (c.general == "k3" ? "general/k=3" : "general/" + key_value("pi", pi_label1))
              : "sweep";

  struct Point {
    std::string experiment;
    double x;
    PlantedParameters pq;
  };
  std::vector<Point> grid_points;
  for (double x : points) {
    const double degree = by_degree ? x : c.degree;
    const double ratio = by_degree ? c.ratio : x;
    grid_points.push_back({prefix + "/" + key_value(by_degree ? "degree" : "ratio", x), x,
                           planted_from_degree(c.n, pi, degree, ratio)});
  }

  std::vector<Task> tasks;
  for (const auto& pt : grid_points)
    for (int trial = 0; trial < c.trials; ++trial)
      tasks.push_back([&, pt, trial] {
        const auto trial_seed = derive_seed(c.seed, pt.experiment, static_cast<std::uint64_t>(trial));
        const Graph graph = generate_sbm(graph_config(c.n, k, pt.pq.p, pt.pq.q, pi_label1, c.backend),
                                         derive_seed(trial_seed, "graph", 0));
        TrialSpec s;
        s.graph = &graph;
        s.seed = trial_seed;
        s.k = k;
        s.pi = pi;
        s.p_true = pt.pq.p;
        s.q_true = pt.pq.q;
        if (general) {
          s.p_hat = pt.pq.p;
          s.q_hat = pt.pq.q;
        } else {
          // Start from the empirical density and the known ratio, then
          // re-estimate jointly.
          const double ratio = by_degree ? c.ratio : pt.x;
          s.p_hat = clamp_probability(graph.density());
          s.q_hat = clamp_probability(s.p_hat / ratio);
          s.update = true;
        }
        s.max_meta_iters = c.max_meta_iters;
        s.max_iters = c.max_iters;
        s.tol = c.tol;
        TaskOutput out;
        for (const auto& algorithm : c.algorithms)
          push_final_rows(out, pt.experiment, algorithm, trial, run_algorithm(algorithm, s), graph, k);
        return out;
      });
  for (auto& t : run_tasks(tasks, c.workers)) {
    result.rows.insert(result.rows.end(), t.rows.begin(), t.rows.end());
    result.warnings.insert(result.warnings.end(), t.warnings.begin(), t.warnings.end());
  }

  svg::LineChart chart;
  chart.title = prefix;
  chart.x_label = by_degree ? "average degree" : "p0 / q0";
  chart.y_label = "NMI";
  for (const auto& algorithm : c.algorithms) {
    svg::Series s;
    s.label = algorithm;
    for (const auto& pt : grid_points) {
      const auto st = stats(trial_values(result.rows, pt.experiment, algorithm, "nmi"));
      s.x.push_back(pt.x);
      s.mean.push_back(st.mean);
      s.sd.push_back(st.sd);
    }
    chart.series.push_back(std::move(s));
  }
  const std::string name = general ? (c.general == "k3" ? "general_k3.svg" : "general_unbalanced.svg")
                                   : (by_degree ? "sweep_degree.svg" : "sweep_ratio.svg");
  result.charts.push_back({name, svg::render_lines(chart)});
}

// Aligns a labeling to the truth with the best label permutation.
std::vector<int> align_labels(const std::vector<int>& labels, const std::vector<int>& truth, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k)), best;
  std::iota(perm.begin(), perm.end(), 0);
  long best_hits = -1;
  do {
    long hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      hits += perm[static_cast<std::size_t>(labels[i])] == truth[i];
    if (hits > best_hits) {
      best_hits = hits;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = best[static_cast<std::size_t>(labels[i])];
  return out;
}

void raster(const ExperimentConfig& c, ExperimentResult& result) {
  const int k = 3;
  const auto pi = class_probabilities(k, 0.5);
  const std::string e = "general/k=3/" + key_value("p", c.p) + "/" + key_value("q", c.q);
  std::vector<Task> tasks;
  for (int trial = 0; trial < c.trials; ++trial)
    tasks.push_back([&, trial] {
      const auto trial_seed = derive_seed(c.seed, e, static_cast<std::uint64_t>(trial));
      const Graph graph = generate_sbm(graph_config(c.n, k, c.p, c.q, 0.5, c.backend),
                                       derive_seed(trial_seed, "graph", 0));
      TrialSpec s;
      s.graph = &graph;
      s.seed = trial_seed;
      s.k = k;
      s.pi = pi;
      s.p_true = s.p_hat = c.p;
      s.q_true = s.q_hat = c.q;
      s.max_meta_iters = c.max_meta_iters;
      s.max_iters = c.max_iters;
      s.tol = c.tol;
      TaskOutput out;
      // Nodes sorted by true class so that recovered blocks line up.
      std::vector<std::size_t> order(graph.n());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return graph.labels()[a] < graph.labels()[b];
      });
      for (const auto& algorithm : c.algorithms) {
        const auto o = run_algorithm(algorithm, s);
        push_final_rows(out, e, algorithm, trial, o, graph, k);
        const auto aligned = align_labels(o.labels, graph.labels(), k);
        std::vector<int> row(graph.n());
        for (std::size_t i = 0; i < order.size(); ++i) row[i] = aligned[order[i]];
        out.labels.push_back({e, algorithm, trial, std::move(row)});
      }
      return out;
    });
  std::map<std::string, std::vector<std::vector<int>>> rows_by_algorithm;
  for (auto& t : run_tasks(tasks, c.workers)) {
    result.rows.insert(result.rows.end(), t.rows.begin(), t.rows.end());
    result.warnings.insert(result.warnings.end(), t.warnings.begin(), t.warnings.end());
    for (auto& l : t.labels) rows_by_algorithm[l.algorithm].push_back(std::move(l.labels));
  }
  for (auto& [algorithm, rows] : rows_by_algorithm) {
    // Identical label rows end up adjacent.
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    });
    result.charts.push_back({"raster_" + algorithm + ".svg",
                             svg::render_raster(algorithm + " memberships, K=3", rows, k)});
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  switch (config.kind) {
    case ExperimentKind::Convergence:
    case ExperimentKind::Ablation:
      convergence_like(config, result);
      break;
    case ExperimentKind::Heatmap:
      heatmap(config, result);
      break;
    case ExperimentKind::Sweep:
      sweep_like(config, result);
      break;
    case ExperimentKind::General:
      if (config.general == "raster")
        raster(config, result);
      else
        sweep_like(config, result);
      break;
  }
  json summary{{"kind", to_string(config.kind)},
               {"config", json::parse(config.to_json())},
               {"nmi_normalization", "sqrt"},
               {"rows", result.rows.size()},
               {"groups", summary_groups(result.rows)},
               {"warnings", result.warnings}};
  result.summary_json = summary.dump(2);
  return result;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::Io, "cannot create output directory " + dir.string());
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    require(static_cast<bool>(f), ErrorCode::Io, "cannot write " + (dir / name).string());
    f << text;
  };
  write("results.csv", results_csv(result.rows));
  write("summary.json", result.summary_json + "\n");
  for (const auto& [name, body] : result.charts) write(name, body);
}

}  // namespace sbmvi
