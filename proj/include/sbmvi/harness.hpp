#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sbmvi/sbm.hpp"

namespace sbmvi {

enum class ExperimentKind { Convergence, Heatmap, Sweep, General, Ablation };

const char* to_string(ExperimentKind kind) noexcept;
ExperimentKind parse_experiment_kind(const std::string& name);

// Flat experiment description; every field maps to a JSON key of the same
// name. Fields that a kind does not use are ignored.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Convergence;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;

  std::size_t n = 3000;
  int k = 2;
  double p = 0.2;
  double q = 0.01;
  double pi = 0.5;  // P(label 1) in two-class runs
  int trials = 20;
  std::vector<std::string> algorithms;  // vips, mfvi, bp, spectral
  Backend backend = Backend::Auto;

  // convergence / ablation
  std::vector<double> mus;
  int ticks = 31;  // trajectory length including tick 0
  std::vector<std::string> schemes;  // ablation: true, estimate, update

  // heatmap
  std::vector<double> p_grid;
  std::vector<double> q_grid;

  // sweep / general
  std::string sweep = "ratio";  // ratio | degree
  std::vector<double> ratios;
  std::vector<double> degrees;
  double degree = 70.0;
  double ratio = 2.0;
  std::string general = "unbalanced";  // unbalanced | k3 | raster

  int max_meta_iters = 100;
  int max_iters = 300;
  double tol = 1e-6;

  /// Paper-scale defaults for each experiment kind.
  static ExperimentConfig defaults(ExperimentKind kind);
  /// Overlays the keys present in a flat JSON object onto `base`.
  static ExperimentConfig from_json(const std::string& text, ExperimentConfig base);
  std::string to_json() const;
  void validate() const;
};

struct PlantedParameters {
  double p = 0.0;
  double q = 0.0;
};

/// (p, q) with p = r q and expected average degree d for class
/// probabilities pi: q = d / (n (s r + 1 - s)), s = sum pi_a^2. For two
/// balanced classes this is q = 2d / (n (1 + r)).
PlantedParameters planted_from_degree(std::size_t n, const std::vector<double>& pi,
                                      double degree, double ratio);

// One long-format result line.
struct ResultRow {
  std::string experiment;
  std::string algorithm;
  int trial = 0;
  int iteration = 0;
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::string summary_json;
  std::vector<std::pair<std::string, std::string>> charts;  // file name, SVG
  std::vector<std::string> warnings;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Header plus one line per row; values use round-trip precision.
std::string results_csv(const std::vector<ResultRow>& rows);

/// Writes results.csv, summary.json and the charts into dir.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

/// Per-trial values of a metric, taken at `iteration` or, when iteration is
/// negative, at each trial's last recorded iteration. Ordered by trial.
std::vector<double> trial_values(const std::vector<ResultRow>& rows,
                                 const std::string& experiment, const std::string& algorithm,
                                 const std::string& metric, int iteration = -1);

/// Key fragment for a numeric parameter, e.g. key_value("mu", 0.5) == "mu=0.5".
std::string key_value(const std::string& name, double value);

}  // namespace sbmvi
