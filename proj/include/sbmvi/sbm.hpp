#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sbmvi/binary_matrix.hpp"

namespace sbmvi {

enum class AssignmentMode { ExactBalanced, Multinomial };
enum class Backend { Auto, Dense, Sparse };

/// Above this node count Backend::Auto selects CSR storage.
inline constexpr std::size_t kDenseBackendLimit = 8192;
/// Probabilities at the boundary of (0,1) are clamped to [eps, 1 - eps].
inline constexpr double kProbabilityEps = 1e-8;

struct SbmConfig {
  std::size_t n = 0;
  int k = 2;
  std::vector<double> pi;                 // length k, sums to 1
  std::vector<double> b;                  // k x k row-major, symmetric
  AssignmentMode assignment = AssignmentMode::ExactBalanced;
  Backend backend = Backend::Auto;

  /// Two-class model with B11 = B22 = p, B12 = q; label 1 (G1) has
  /// probability pi and label 0 (G2) probability 1 - pi.
  static SbmConfig two_class(std::size_t n, double p, double q, double pi = 0.5,
                             AssignmentMode mode = AssignmentMode::ExactBalanced);
  /// Balanced planted partition B = (p - q) I + q J.
  static SbmConfig planted(std::size_t n, int k, double p, double q,
                           AssignmentMode mode = AssignmentMode::ExactBalanced);

  double block(int a, int c) const { return b[static_cast<std::size_t>(a * k + c)]; }
  void validate() const;
};

// Symmetric 0/1 adjacency with zero diagonal plus ground-truth labels.
// Immutable once built.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t n, int k, std::vector<int> labels, BinaryMatrix adjacency,
        std::optional<SbmConfig> config = std::nullopt);

  /// Edges may be listed in either orientation; each is stored symmetrically.
  static Graph from_edges(std::size_t n, int k, std::vector<int> labels,
                          std::span<const Entry> edges, Backend backend = Backend::Auto);

  std::size_t n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const BinaryMatrix& adjacency() const noexcept { return adj_; }
  const std::optional<SbmConfig>& config() const noexcept { return config_; }

  bool has_edge(std::size_t i, std::size_t j) const noexcept { return adj_.at(i, j); }
  std::size_t degree(std::size_t i) const noexcept { return adj_.row_nnz(i); }
  std::size_t edge_count() const noexcept { return adj_.nnz() / 2; }
  /// Each undirected edge once, as (u, v) with u < v, sorted.
  std::vector<Entry> edges() const;
  /// Sum_{i != j} A_ij / (n (n - 1)).
  double density() const noexcept;

  Graph with_backend(Backend backend) const;

 private:
  std::size_t n_ = 0;
  int k_ = 2;
  std::vector<int> labels_;
  BinaryMatrix adj_;
  std::optional<SbmConfig> config_;
};

Storage resolve_backend(Backend backend, std::size_t n) noexcept;

Graph generate_sbm(const SbmConfig& config, std::uint64_t seed);

struct LogitConstants {
  double t = 0.0;
  double lambda = 0.0;
};

/// t = 1/2 log[(p/(1-p)) / (q/(1-q))], lambda = log[(1-q)/(1-p)] / (2t).
/// Inputs are clamped into [eps, 1 - eps]; p == q is an error.
LogitConstants logit_constants(double p, double q);

/// Like logit_constants, but p == q yields the t -> 0 limit (t = 0,
/// lambda = p) instead of failing. Used when working parameters are estimated.
LogitConstants logit_constants_or_limit(double p, double q);

double clamp_probability(double p) noexcept;

// Edge-list text (`u v` per line, each undirected edge once) plus a JSON
// sidecar with n, K, labels and the generating config.
void save_graph(const Graph& graph, const std::filesystem::path& edges_path,
                const std::filesystem::path& meta_path);
Graph load_graph(const std::filesystem::path& edges_path,
                 const std::filesystem::path& meta_path, Backend backend = Backend::Auto);

}  // namespace sbmvi
