#include "sbmvi/vips_general.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "kernels.hpp"
#include "sbmvi/error.hpp"
#include "sbmvi/random.hpp"
#include "sbmvi/vips.hpp"

namespace sbmvi {

using detail::shifted_product;

std::vector<double> GeneralInitSpec::draw(std::size_t n, int k, std::uint64_t seed) const {
  const auto kk = static_cast<std::size_t>(k);
  if (kind == GeneralInitKind::Explicit) {
    require(values.size() == n * kk, ErrorCode::InvalidInput,
            "explicit init must be n x K (" + std::to_string(n * kk) + " values)");
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t a = 0; a < kk; ++a) {
        const double v = values[i * kk + a];
        require(v >= 0.0 && v <= 1.0, ErrorCode::InvalidInput, "init entries must lie in [0,1]");
        s += v;
      }
      require(std::abs(s - 1.0) < 1e-9, ErrorCode::InvalidInput, "init rows must sum to 1");
    }
    return values;
  }
  require(alpha > 0.0, ErrorCode::InvalidConfig, "Dirichlet alpha must be positive");
  require(alpha == 1.0, ErrorCode::InvalidConfig,
          "only the flat Dirichlet(1, ..., 1) initialization is supported");
  Rng rng(seed);
  std::vector<double> u(n * kk);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t a = 0; a < kk; ++a) s += (u[i * kk + a] = rng.exponential());
    for (std::size_t a = 0; a < kk; ++a) u[i * kk + a] /= s;
  }
  return u;
}

void GeneralVipsConfig::validate() const {
  require(k >= 2, ErrorCode::InvalidConfig, "K must be at least 2");
  require(p_hat > 0.0 && p_hat < 1.0 && q_hat > 0.0 && q_hat < 1.0,
          ErrorCode::InvalidConfig, "p_hat and q_hat must lie in (0,1)");
  require(tol > 0.0 && max_meta_iters >= 1, ErrorCode::InvalidConfig,
          "tol must be positive and max_meta_iters >= 1");
  if (!pi.empty()) {
    require(pi.size() == static_cast<std::size_t>(k), ErrorCode::InvalidConfig,
            "pi must have length K");
    double s = 0.0;
    for (double v : pi) {
      require(v > 0.0 && v < 1.0, ErrorCode::InvalidConfig, "pi entries must lie in (0,1)");
      s += v;
    }
    require(std::abs(s - 1.0) < 1e-9, ErrorCode::InvalidConfig, "pi must sum to 1");
  }
}

std::vector<double> GeneralVipsConfig::class_probabilities() const {
  if (!pi.empty()) return pi;
  return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
}

GeneralVipsState init_general_state(std::size_t n, const GeneralVipsConfig& config,
                                    std::uint64_t seed) {
  config.validate();
  require(n % 2 == 0 && n > 0, ErrorCode::InvalidInput,
          "VIPS needs a positive even node count, got " + std::to_string(n));
  const std::size_t m = n / 2;
  const auto kk = static_cast<std::size_t>(config.k);
  GeneralVipsState s;
  s.m = m;
  s.k = config.k;
  s.theta.assign(m * kk * kk, 0.0);
  s.psi.assign(m * kk * kk, 1.0 / static_cast<double>(kk * kk));
  s.u = config.init.draw(n, config.k, seed);
  s.phi.assign(s.u.begin(), s.u.begin() + static_cast<std::ptrdiff_t>(m * kk));
  s.xi.assign(s.u.begin() + static_cast<std::ptrdiff_t>(m * kk), s.u.end());
  return s;
}

void refresh_general(GeneralVipsState& s) {
  const auto kk = static_cast<std::size_t>(s.k);
  const std::size_t cells = kk * kk;
  require(s.theta.size() == s.m * cells, ErrorCode::InvalidInput,
          "theta must hold m x K x K logits");
  s.psi.resize(s.m * cells);
  s.phi.assign(s.m * kk, 0.0);
  s.xi.assign(s.m * kk, 0.0);
  for (std::size_t i = 0; i < s.m; ++i) {
    double* th = s.theta.data() + i * cells;
    double* ps = s.psi.data() + i * cells;
    th[0] = 0.0;
    double top = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      if (!std::isfinite(th[c]))
        fail(ErrorCode::Numeric, "non-finite logit at pair " + std::to_string(i));
      top = std::max(top, th[c]);
    }
    double z = 0.0;
    for (std::size_t c = 0; c < cells; ++c) z += (ps[c] = std::exp(std::max(th[c] - top, -kLogitClamp)));
    for (std::size_t c = 0; c < cells; ++c) ps[c] /= z;
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t b = 0; b < kk; ++b) {
        s.phi[i * kk + a] += ps[a * kk + b];
        s.xi[i * kk + b] += ps[a * kk + b];
      }
  }
  s.u = s.phi;
  s.u.insert(s.u.end(), s.xi.begin(), s.xi.end());
}

namespace {

// Column a of an m x K matrix minus column 0.
std::vector<double> contrast(const std::vector<double>& mat, std::size_t m, std::size_t kk,
                             std::size_t a) {
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = mat[i * kk + a] - mat[i * kk];
  return out;
}

// Marginal part of theta^{a0} (z side) or theta^{0a} (y side), without the
// pair term and prior.
std::vector<double> side_logit(const GeneralVipsState& s, const BlockViews& blocks,
                               const LogitConstants& consts, std::size_t a, bool z_side) {
  const std::size_t m = s.m;
  const auto kk = static_cast<std::size_t>(s.k);
  const auto own = contrast(z_side ? s.phi : s.xi, m, kk, a);
  const auto other = contrast(z_side ? s.xi : s.phi, m, kk, a);
  std::vector<double> same(m), cross(m), out(m);
  shifted_product(z_side ? blocks.a_zz : blocks.a_yy, own, consts.lambda, nullptr, same);
  shifted_product(z_side ? blocks.a_zy : blocks.a_yz, other, consts.lambda, &blocks.a_zy_diag,
                  cross);
  for (std::size_t i = 0; i < m; ++i) out[i] = 2.0 * consts.t * same[i] + 2.0 * consts.t * cross[i];
  return out;
}

double pair_term(const BlockViews& blocks, const LogitConstants& consts, std::size_t i) {
  return 2.0 * consts.t * (blocks.a_zy_diag[i] - consts.lambda);
}

void check_general_dims(const GeneralVipsState& s, const BlockViews& blocks,
                        std::span<const double> pi) {
  require(s.m == blocks.m(), ErrorCode::InvalidInput,
          "state and block views disagree on the pair count");
  require(pi.size() == static_cast<std::size_t>(s.k), ErrorCode::InvalidInput,
          "pi must have length K");
}

}  // namespace

void general_update_z_side(GeneralVipsState& s, const BlockViews& blocks,
                           const LogitConstants& consts, std::span<const double> pi) {
  check_general_dims(s, blocks, pi);
  for (int a = 1; a < s.k; ++a) {
    const auto r = side_logit(s, blocks, consts, static_cast<std::size_t>(a), true);
    const double prior = std::log(pi[static_cast<std::size_t>(a)] / pi[0]);
    for (std::size_t i = 0; i < s.m; ++i)
      s.theta[s.cell(i, a, 0)] = r[i] - pair_term(blocks, consts, i) + prior;
  }
}

void general_update_y_side(GeneralVipsState& s, const BlockViews& blocks,
                           const LogitConstants& consts, std::span<const double> pi) {
  check_general_dims(s, blocks, pi);
  for (int b = 1; b < s.k; ++b) {
    const auto r = side_logit(s, blocks, consts, static_cast<std::size_t>(b), false);
    const double prior = std::log(pi[static_cast<std::size_t>(b)] / pi[0]);
    for (std::size_t i = 0; i < s.m; ++i)
      s.theta[s.cell(i, 0, b)] = r[i] - pair_term(blocks, consts, i) + prior;
  }
}

void general_update_joint(GeneralVipsState& s, const BlockViews& blocks,
                          const LogitConstants& consts, std::span<const double> pi) {
  check_general_dims(s, blocks, pi);
  const auto kk = static_cast<std::size_t>(s.k);
  std::vector<std::vector<double>> rz(kk), ry(kk);
  for (std::size_t a = 1; a < kk; ++a) {
    rz[a] = side_logit(s, blocks, consts, a, true);
    ry[a] = side_logit(s, blocks, consts, a, false);
  }
  for (std::size_t a = 1; a < kk; ++a)
    for (std::size_t b = 1; b < kk; ++b) {
      const double prior = std::log(pi[a] / pi[0]) + std::log(pi[b] / pi[0]);
      for (std::size_t i = 0; i < s.m; ++i) {
        const double pair = a == b ? 0.0 : pair_term(blocks, consts, i);
        s.theta[s.cell(i, static_cast<int>(a), static_cast<int>(b))] =
            rz[a][i] + ry[b][i] - pair + prior;
      }
    }
}

GeneralMetaResult general_meta_iteration(GeneralVipsState& s, const BlockViews& blocks,
                                         const LogitConstants& consts,
                                         std::span<const double> pi) {
  GeneralMetaResult out;
  general_update_z_side(s, blocks, consts, pi);
  refresh_general(s);
  out.u[0] = s.u;
  general_update_y_side(s, blocks, consts, pi);
  refresh_general(s);
  out.u[1] = s.u;
  general_update_joint(s, blocks, consts, pi);
  refresh_general(s);
  out.u[2] = s.u;
  return out;
}

double general_invariant_violation(const GeneralVipsState& s) {
  const auto kk = static_cast<std::size_t>(s.k);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.m; ++i) {
    double total = 0.0;
    for (std::size_t a = 0; a < kk; ++a) {
      double row = 0.0, col = 0.0;
      for (std::size_t b = 0; b < kk; ++b) {
        const double v = s.psi[(i * kk + a) * kk + b];
        worst = std::max(worst, -v);
        total += v;
        row += v;
        col += s.psi[(i * kk + b) * kk + a];
      }
      worst = std::max(worst, std::abs(s.phi[i * kk + a] - row));
      worst = std::max(worst, std::abs(s.xi[i * kk + a] - col));
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

GeneralVipsRun run_vips_general(const Graph& graph, const Pairing& pairing,
                                const GeneralVipsConfig& config, std::uint64_t seed) {
  return run_vips_general(graph, pairing, block_views(graph, pairing), config, seed);
}

GeneralVipsRun run_vips_general(const Graph& graph, const Pairing& pairing,
                                const BlockViews& blocks, const GeneralVipsConfig& config,
                                std::uint64_t seed) {
  config.validate();
  require(graph.n() == pairing.n() && blocks.m() == pairing.m(), ErrorCode::InvalidInput,
          "graph, pairing and block views must describe the same nodes");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = graph.n();
  const std::size_t m = pairing.m();
  const auto kk = static_cast<std::size_t>(config.k);
  const auto pi = config.class_probabilities();
  const LogitConstants consts = logit_constants_or_limit(config.p_hat, config.q_hat);

  std::vector<int> z_pair(n);
  for (std::size_t i = 0; i < m; ++i) {
    z_pair[i] = graph.labels()[pairing.p1()[i]];
    z_pair[m + i] = graph.labels()[pairing.p2()[i]];
  }
  const bool scorable = graph.k() <= config.k && config.k <= 6;

  GeneralVipsRun run;
  run.record.algorithm = "vips";
  run.record.seed = seed;
  run.state = init_general_state(n, config, seed);

  auto record = [&](int tick, int meta, const std::vector<double>& u) {
    IterationMetrics it;
    it.iteration = tick;
    it.meta = meta;
    if (scorable) it.l1 = l1_to_truth_general(u, z_pair, config.k);
    it.nmi = nmi(hard_labels_general(u, config.k), z_pair);
    run.record.iterations.push_back(it);
  };
  record(0, 0, run.state.u);

  int tick = 0;
  for (int meta = 1; meta <= config.max_meta_iters; ++meta) {
    const std::vector<double> before = run.state.u;
    auto snaps = general_meta_iteration(run.state, blocks, consts, pi);
    run.meta_iterations = meta;
    for (const auto& u : snaps.u) record(++tick, meta, u);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < kk; ++a)
        change += std::abs(run.state.u[i * kk + a] - before[i * kk + a]);
    // Per-node change, comparable with the two-class criterion.
    change /= 2.0 * static_cast<double>(n);
    if (change < config.tol) {
      run.record.converged = true;
      if (!config.run_to_max) break;
    }
  }
  run.u_nodes.assign(n * kk, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < kk; ++a) {
      run.u_nodes[pairing.p1()[i] * kk + a] = run.state.u[i * kk + a];
      run.u_nodes[pairing.p2()[i] * kk + a] = run.state.u[(m + i) * kk + a];
    }
  run.labels = hard_labels_general(run.u_nodes, config.k);
  run.record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

double elbo_general(const GeneralVipsState& s, const BlockViews& blocks,
                    std::span<const double> b, std::span<const double> pi) {
  const auto kk = static_cast<std::size_t>(s.k);
  require(b.size() == kk * kk && pi.size() == kk, ErrorCode::InvalidInput,
          "elbo_general: B must be K x K and pi length K");
  require(s.m == blocks.m(), ErrorCode::InvalidInput, "elbo_general: dimension mismatch");
  const std::size_t m = s.m;
  auto loglik = [&](bool edge, std::size_t a, std::size_t c) {
    const double p = b[a * kk + c];
    return edge ? std::log(p) : std::log1p(-p);
  };
  // Marginals from psi.
  std::vector<double> phi(m * kk, 0.0), xi(m * kk, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t c = 0; c < kk; ++c) {
        phi[i * kk + a] += s.psi[(i * kk + a) * kk + c];
        xi[i * kk + c] += s.psi[(i * kk + a) * kk + c];
      }
  auto expected = [&](const std::vector<double>& left, std::size_t i,
                      const std::vector<double>& right, std::size_t j, bool edge) {
    double acc = 0.0;
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t c = 0; c < kk; ++c)
        acc += left[i * kk + a] * right[j * kk + c] * loglik(edge, a, c);
    return acc;
  };
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      total += expected(phi, i, phi, j, blocks.a_zz.at(i, j));
      total += expected(xi, i, xi, j, blocks.a_yy.at(i, j));
    }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j) total += expected(phi, i, xi, j, blocks.a_zy.at(i, j));
  for (std::size_t i = 0; i < m; ++i) {
    const bool edge = blocks.a_zy_diag[i] != 0.0;
    for (std::size_t a = 0; a < kk; ++a)
      for (std::size_t c = 0; c < kk; ++c) {
        const double v = s.psi[(i * kk + a) * kk + c];
        total += v * loglik(edge, a, c);
        if (v > 0.0) total -= v * (std::log(v) - std::log(pi[a]) - std::log(pi[c]));
      }
  }
  return total;
}

}  // namespace sbmvi
