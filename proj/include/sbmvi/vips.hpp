#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbmvi/metrics.hpp"
#include "sbmvi/pairing.hpp"
#include "sbmvi/sbm.hpp"

namespace sbmvi {

/// Max-shifted logits are clamped below at -kLogitClamp before
/// exponentiation, so every cell keeps a positive probability.
inline constexpr double kLogitClamp = 700.0;

enum class InitKind { Bernoulli, Constant, Uniform, Explicit };

/// Initial membership vector u0. Draws and explicit values are in pairing
/// order: the m P1-side entries followed by the m P2-side entries.
struct InitSpec {
  InitKind kind = InitKind::Bernoulli;
  double value = 0.5;              // Bernoulli mean or constant value
  std::vector<double> values;      // Explicit

  static InitSpec bernoulli(double mu) { return {InitKind::Bernoulli, mu, {}}; }
  static InitSpec constant(double c) { return {InitKind::Constant, c, {}}; }
  static InitSpec uniform() { return {InitKind::Uniform, 0.0, {}}; }
  static InitSpec explicit_vector(std::vector<double> u) {
    return {InitKind::Explicit, 0.0, std::move(u)};
  }

  std::vector<double> draw(std::size_t n, std::uint64_t seed) const;
};

struct VipsConfig {
  double p_hat = 0.2;
  double q_hat = 0.1;
  double pi = 0.5;
  bool update_params = false;
  int param_update_start = 3;
  int max_meta_iters = 100;
  double tol = 1e-6;
  InitSpec init;
  /// Keep iterating until max_meta_iters even after convergence.
  bool run_to_max = false;
  bool record_elbo = true;
  /// Verify simplex and marginal invariants after each refresh.
  bool check_invariants = false;

  void validate() const;
};

// Pairwise variational state. All vectors have length m except u, which is
// the length-n concatenation (phi, xi).
struct VipsState {
  std::size_t m = 0;
  std::vector<double> theta10, theta01, theta11;
  std::vector<double> psi00, psi01, psi10, psi11;
  std::vector<double> phi, xi;
  std::vector<double> u;

  /// Sets psi (psi00 = 1 - the others) and recomputes phi, xi, u and the
  /// logits implied by psi.
  void set_psi(std::span<const double> p10, std::span<const double> p01,
               std::span<const double> p11);
};

VipsState init_state(std::size_t n, const VipsConfig& config, std::uint64_t seed);

std::vector<double> update_theta10(const VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts);
std::vector<double> update_theta01(const VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts);
std::vector<double> update_theta11(const VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts);

/// Prior shift for unbalanced classes: logit(pi) on theta10 and theta01,
/// 2 logit(pi) on theta11.
void unbalanced_adjustment(std::span<double> theta10, std::span<double> theta01,
                           std::span<double> theta11, double pi);

/// Recomputes psi, phi, xi and u with a max-shifted softmax over
/// {0, theta10, theta01, theta11}. Non-finite logits are a Numeric error.
void refresh(VipsState& state);

struct InvariantViolation {
  double simplex = 0.0;    // max |sum psi - 1| and max negative psi
  double marginals = 0.0;  // max |phi - (psi10 + psi11)|, |xi - (psi01 + psi11)|
  double max() const { return simplex > marginals ? simplex : marginals; }
};
InvariantViolation check_invariants(const VipsState& state);

struct MetaIterationResult {
  std::array<std::vector<double>, 3> u;  // u after each inner refresh
};

/// theta10 -> u -> theta01 -> u -> theta11 -> u.
MetaIterationResult meta_iteration(VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts, double pi = 0.5);

struct ParameterEstimate {
  double p_hat = 0.0;
  double q_hat = 0.0;
};

/// Joint re-estimation of (p, q) from the current state. Dyads between the
/// two nodes of a pair are weighted by the pair's joint probabilities
/// (psi10 + psi01 for discordance); all other dyads by products of marginals.
ParameterEstimate update_parameters(const VipsState& state, const BlockViews& blocks);
ParameterEstimate update_parameters(const VipsState& state, const Graph& graph,
                                    const Pairing& pairing);

struct VipsRun {
  VipsState state;
  TrialRecord record;
  double p_hat = 0.0;
  double q_hat = 0.0;
  int meta_iterations = 0;
  std::vector<double> u_nodes;  // final u in node order
};

/// Runs the pairwise coordinate ascent until the mean absolute change of u
/// over a meta iteration drops below tol, or max_meta_iters.
VipsRun run_vips(const Graph& graph, const Pairing& pairing, const VipsConfig& config,
                 std::uint64_t seed);
VipsRun run_vips(const Graph& graph, const Pairing& pairing, const BlockViews& blocks,
                 const VipsConfig& config, std::uint64_t seed);

// Checkpoint: state vectors, counters, working parameters and seeds.
struct Checkpoint {
  VipsState state;
  int meta_iteration = 0;
  int tick = 0;
  double p_hat = 0.0;
  double q_hat = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t pairing_seed = 0;
};

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

}  // namespace sbmvi
