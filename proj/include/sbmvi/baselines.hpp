#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sbmvi/metrics.hpp"
#include "sbmvi/sbm.hpp"
#include "sbmvi/vips.hpp"
#include "sbmvi/vips_general.hpp"

namespace sbmvi {

// ---- Mean-field batch coordinate ascent -----------------------------------

struct MfviConfig {
  int k = 2;
  std::vector<double> pi;  // empty means uniform; for K = 2, pi[1] is P(label 1)
  double p_hat = 0.2;
  double q_hat = 0.1;
  InitSpec init;                 // K = 2, node order
  GeneralInitSpec general_init;  // K > 2, n x K node order
  double tol = 1e-6;
  int max_iters = 300;
  bool run_to_max = false;
  bool update_params = false;
  int param_update_start = 9;

  void validate() const;
  std::vector<double> class_probabilities() const;
};

struct MfviRun {
  std::vector<double> u;  // length n for K = 2, else n x K
  std::vector<int> labels;
  TrialRecord record;
  double p_hat = 0.0;
  double q_hat = 0.0;
  int iterations = 0;
};

/// One batch sweep for K = 2:
///   u <- logistic(4t [A - lambda (J - I)] (u - 1/2) + logit(pi)).
std::vector<double> mfvi_sweep(const Graph& graph, std::span<const double> u,
                               const LogitConstants& consts, double pi = 0.5);

/// One batch sweep for K classes; rows of u are replaced by
/// softmax_a(2t sum_{j != i} (A_ij - lambda) u_ja + log pi_a).
std::vector<double> mfvi_sweep_general(const Graph& graph, std::span<const double> u, int k,
                                       const LogitConstants& consts,
                                       std::span<const double> pi);

/// Mean-field (p, q) re-estimation from soft memberships (n x K, or length n
/// for K = 2).
ParameterEstimate mfvi_parameters(const Graph& graph, std::span<const double> u, int k);

MfviRun run_mfvi(const Graph& graph, const MfviConfig& config, std::uint64_t seed);

// ---- Spectral clustering --------------------------------------------------

using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

struct SpectralOptions {
  double tol = 1e-10;
  int max_iters = 5000;
  int kmeans_restarts = 20;
};

struct SpectralResult {
  std::vector<int> labels;
  std::vector<double> eigenvectors;  // n x K, column j is the j-th eigenvector
  std::vector<double> eigenvalues;
  bool converged = true;
  int iterations = 0;
};

/// Leading eigenvectors of the symmetric operator by deflated power
/// iteration on (op + shift I), then labels: the sign of the second
/// eigenvector for K = 2 (zero goes to label 1), k-means on the rows of the
/// K leading eigenvectors otherwise.
SpectralResult spectral_cluster_operator(const LinearOperator& op, std::size_t n, int k,
                                         double shift, std::uint64_t seed,
                                         const SpectralOptions& options = {});

SpectralResult spectral_cluster(const Graph& graph, int k, std::uint64_t seed,
                                const SpectralOptions& options = {});

/// Seeded Lloyd iterations with k-means++ starts; returns the best of
/// `restarts` runs by within-cluster sum of squares.
std::vector<int> kmeans(std::span<const double> points, std::size_t dim, int k, int restarts,
                        std::uint64_t seed);

// ---- Belief propagation ----------------------------------------------------

struct BpConfig {
  double damping = 0.5;
  int max_iters = 200;
  double tol = 1e-6;
  /// Initial messages are pi_a (1 + init_noise * U(-1, 1)), normalized.
  double init_noise = 0.1;
};

struct BpRun {
  std::vector<double> beliefs;  // n x K
  std::vector<int> labels;
  TrialRecord record;
  bool converged = false;
  int iterations = 0;
};

/// Sum-product on the edges of the graph; non-edges enter through a field
/// computed from the current node beliefs. b is K x K (row-major).
BpRun run_bp(const Graph& graph, std::span<const double> b, std::span<const double> pi, int k,
             const BpConfig& config, std::uint64_t seed);

/// Planted partition B = (p - q) I + q J.
BpRun run_bp(const Graph& graph, double p, double q, std::span<const double> pi, int k,
             const BpConfig& config, std::uint64_t seed);

}  // namespace sbmvi
