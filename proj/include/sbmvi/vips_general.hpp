#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sbmvi/metrics.hpp"
#include "sbmvi/pairing.hpp"
#include "sbmvi/sbm.hpp"

namespace sbmvi {

enum class GeneralInitKind { Dirichlet, Explicit };

/// Initial n x K membership matrix in pairing order (P1 rows, then P2 rows).
struct GeneralInitSpec {
  GeneralInitKind kind = GeneralInitKind::Dirichlet;
  double alpha = 1.0;
  std::vector<double> values;

  static GeneralInitSpec dirichlet(double alpha) { return {GeneralInitKind::Dirichlet, alpha, {}}; }
  static GeneralInitSpec explicit_matrix(std::vector<double> u) {
    return {GeneralInitKind::Explicit, 0.0, std::move(u)};
  }

  std::vector<double> draw(std::size_t n, int k, std::uint64_t seed) const;
};

struct GeneralVipsConfig {
  int k = 3;
  std::vector<double> pi;  // empty means uniform
  double p_hat = 0.2;
  double q_hat = 0.1;
  int max_meta_iters = 100;
  double tol = 1e-6;
  GeneralInitSpec init;
  bool run_to_max = false;

  void validate() const;
  std::vector<double> class_probabilities() const;
};

// K-class pairwise state. theta and psi are m x K x K with cell (a, b) the
// joint label of (z_i, y_i); theta(i, 0, 0) is fixed at 0. phi and xi are
// m x K marginals and u is the 2m x K concatenation (phi rows, xi rows).
struct GeneralVipsState {
  std::size_t m = 0;
  int k = 2;
  std::vector<double> theta, psi;
  std::vector<double> phi, xi;
  std::vector<double> u;

  std::size_t cell(std::size_t i, int a, int b) const {
    const auto kk = static_cast<std::size_t>(k);
    return (i * kk + static_cast<std::size_t>(a)) * kk + static_cast<std::size_t>(b);
  }
};

GeneralVipsState init_general_state(std::size_t n, const GeneralVipsConfig& config,
                                    std::uint64_t seed);

/// Softmax over the K^2 cells of each pair, then marginals.
void refresh_general(GeneralVipsState& state);

/// theta^{a0}, a != 0, from the current marginals.
void general_update_z_side(GeneralVipsState& state, const BlockViews& blocks,
                           const LogitConstants& consts, std::span<const double> pi);
/// theta^{0b}, b != 0.
void general_update_y_side(GeneralVipsState& state, const BlockViews& blocks,
                           const LogitConstants& consts, std::span<const double> pi);
/// theta^{ab}, a, b != 0: the z-side and y-side logits evaluated at the
/// current marginals plus the pair term, 2 S_zy on matching labels and
/// S_zy otherwise, where S_zy = 2t(diag(A^{zy}) - lambda).
void general_update_joint(GeneralVipsState& state, const BlockViews& blocks,
                          const LogitConstants& consts, std::span<const double> pi);

struct GeneralMetaResult {
  std::array<std::vector<double>, 3> u;
};

GeneralMetaResult general_meta_iteration(GeneralVipsState& state, const BlockViews& blocks,
                                         const LogitConstants& consts,
                                         std::span<const double> pi);

double general_invariant_violation(const GeneralVipsState& state);

struct GeneralVipsRun {
  GeneralVipsState state;
  TrialRecord record;
  int meta_iterations = 0;
  std::vector<double> u_nodes;  // n x K, node order
  std::vector<int> labels;      // argmax, node order
};

GeneralVipsRun run_vips_general(const Graph& graph, const Pairing& pairing,
                                const GeneralVipsConfig& config, std::uint64_t seed);
GeneralVipsRun run_vips_general(const Graph& graph, const Pairing& pairing,
                                const BlockViews& blocks, const GeneralVipsConfig& config,
                                std::uint64_t seed);

/// ELBO of the K-class pairwise family for a K x K connectivity matrix b
/// (row-major) and class prior pi. Direct O(m^2 K^2) evaluation.
double elbo_general(const GeneralVipsState& state, const BlockViews& blocks,
                    std::span<const double> b, std::span<const double> pi);

}  // namespace sbmvi
