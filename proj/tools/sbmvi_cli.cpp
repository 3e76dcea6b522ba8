#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbmvi/sbmvi.h"

using json = nlohmann::json;

namespace {

struct Flags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::string config_path;
};

struct ExperimentFlags {
  std::optional<int> trials;
  std::optional<std::size_t> n;
  std::optional<std::string> mode;
  std::vector<std::string> algorithms;
  std::vector<std::string> sets;  // key=value with a JSON value
};

int report(int status) {
  if (status != SBMVI_OK)
    std::cerr << "error (" << sbmvi_status_string(status) << "): " << sbmvi_last_error_message()
              << "\n";
  return status;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j = json::parse(in);
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
  return j;
}

json merged_config(const std::string& kind, const Flags& g, const ExperimentFlags& e) {
  json j = load_config(g.config_path);
  if (g.seed) j["seed"] = *g.seed;
  if (g.workers) j["workers"] = *g.workers;
  if (g.out) j["out"] = *g.out;
  if (e.trials) j["trials"] = *e.trials;
  if (e.n) j["n"] = *e.n;
  if (!e.algorithms.empty()) j["algorithms"] = e.algorithms;
  if (e.mode) j[kind == "sweep" ? "sweep" : "general"] = *e.mode;
  for (const auto& s : e.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got " + s);
    const auto key = s.substr(0, eq);
    const auto value = s.substr(eq + 1);
    try {
      j[key] = json::parse(value);
    } catch (const json::parse_error&) {
      j[key] = value;
    }
  }
  if (!j.contains("out")) j["out"] = "results/" + kind;
  return j;
}

int run_experiment(const std::string& kind, const Flags& g, const ExperimentFlags& e) {
  const json config = merged_config(kind, g, e);
  const std::string out = config["out"].get<std::string>();
  sbmvi_experiment* exp = nullptr;
  if (int s = sbmvi_experiment_run(kind.c_str(), config.dump().c_str(), &exp)) return report(s);
  int status = sbmvi_experiment_write(exp, out.c_str());
  if (status == SBMVI_OK) {
    const json summary = json::parse(sbmvi_experiment_summary(exp));
    std::cout << kind << ": " << sbmvi_experiment_row_count(exp) << " rows written to " << out
              << "\n";
    for (const auto& w : summary.value("warnings", json::array()))
      std::cerr << "warning: " << w.get<std::string>() << "\n";
  }
  sbmvi_experiment_free(exp);
  return report(status);
}

struct GenFlags {
  std::size_t n = 2000;
  int k = 2;
  double p = 0.2;
  double q = 0.01;
  double pi = 0.5;
};

int run_gen(const Flags& g, const GenFlags& f) {
  const std::string out = g.out.value_or("graph");
  const std::uint64_t seed = g.seed.value_or(1);
  sbmvi_graph* graph = nullptr;
  int s;
  if (f.k == 2) {
    s = sbmvi_graph_generate_two_class(f.n, f.p, f.q, f.pi, seed, &graph);
  } else {
    std::vector<double> b(static_cast<std::size_t>(f.k * f.k), f.q);
    for (int a = 0; a < f.k; ++a) b[static_cast<std::size_t>(a * f.k + a)] = f.p;
    const int mode = f.n % static_cast<std::size_t>(f.k) == 0 ? SBMVI_ASSIGN_EXACT_BALANCED
                                                              : SBMVI_ASSIGN_MULTINOMIAL;
    s = sbmvi_graph_generate(f.n, f.k, nullptr, b.data(), mode, SBMVI_BACKEND_AUTO, seed, &graph);
  }
  if (s) return report(s);
  const std::string edges = out + ".edges", meta = out + ".json";
  s = sbmvi_graph_save(graph, edges.c_str(), meta.c_str());
  if (s == SBMVI_OK)
    std::cout << "n=" << sbmvi_graph_n(graph) << " edges=" << sbmvi_graph_edge_count(graph)
              << " density=" << sbmvi_graph_density(graph) << " -> " << edges << ", " << meta
              << "\n";
  sbmvi_graph_free(graph);
  return report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community detection on stochastic block models with pairwise variational inference"};
  app.require_subcommand(1);
  Flags g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--out", g.out, "output directory (experiments) or path prefix (gen)");
  app.add_option("--workers", g.workers, "concurrent trials")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "flat JSON config overlaid on the defaults")
      ->check(CLI::ExistingFile);

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "sample a planted-partition graph");
  gen_cmd->add_option("-n", gen.n, "nodes");
  gen_cmd->add_option("-k", gen.k, "communities");
  gen_cmd->add_option("-p", gen.p, "within-community edge probability");
  gen_cmd->add_option("-q", gen.q, "between-community edge probability");
  gen_cmd->add_option("--pi", gen.pi, "P(label 1), two classes only");

  struct Sub {
    const char* name;
    const char* help;
    const char* mode_help;
  };
  const std::vector<Sub> subs = {
      {"convergence", "l1 trajectories of VIPS and MFVI from random inits", nullptr},
      {"heatmap", "mean NMI over a grid of fixed (p_hat, q_hat)", nullptr},
      {"sweep", "NMI against p/q ratio or average degree", "ratio | degree"},
      {"general", "unbalanced and K=3 settings", "unbalanced | k3 | raster"},
      {"ablation", "true, estimated and updated parameter schemes", nullptr},
  };
  std::vector<ExperimentFlags> flags(subs.size());
  std::vector<CLI::App*> cmds;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    cmd->add_option("--trials", flags[i].trials, "trials per setting");
    cmd->add_option("-n", flags[i].n, "nodes");
    cmd->add_option("--algorithms", flags[i].algorithms, "vips, mfvi, bp, spectral");
    if (subs[i].mode_help) cmd->add_option("--mode", flags[i].mode, subs[i].mode_help);
    cmd->add_option("--set", flags[i].sets, "config override key=value (JSON value)");
    cmds.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen(g, gen);
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (*cmds[i]) return run_experiment(subs[i].name, g, flags[i]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
