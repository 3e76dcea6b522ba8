#include "sbmvi/vips.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "sbmvi/elbo.hpp"
#include "sbmvi/error.hpp"
#include "sbmvi/random.hpp"
#include "kernels.hpp"

namespace sbmvi {

using detail::shifted_product;

namespace {

constexpr double kLogFloor = 1e-300;

std::vector<double> centered(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - 0.5;
  return out;
}

double shifted_exp(double x, double top) {
  return std::exp(std::max(x - top, -kLogitClamp));
}

void check_dims(const VipsState& state, const BlockViews& blocks) {
  require(state.m == blocks.m() && state.phi.size() == state.m && state.xi.size() == state.m,
          ErrorCode::InvalidInput, "state and block views disagree on the pair count");
}

}  // namespace

std::vector<double> InitSpec::draw(std::size_t n, std::uint64_t seed) const {
  std::vector<double> u(n);
  Rng rng(seed);
  switch (kind) {
    case InitKind::Bernoulli:
      require(value >= 0.0 && value <= 1.0, ErrorCode::InvalidConfig,
              "Bernoulli mean must lie in [0,1]");
      for (auto& x : u) x = rng.bernoulli(value) ? 1.0 : 0.0;
      break;
    case InitKind::Constant:
      require(value >= 0.0 && value <= 1.0, ErrorCode::InvalidConfig,
              "constant init must lie in [0,1]");
      std::fill(u.begin(), u.end(), value);
      break;
    case InitKind::Uniform:
      for (auto& x : u) x = rng.uniform();
      break;
    case InitKind::Explicit:
      require(values.size() == n, ErrorCode::InvalidInput,
              "explicit init has length " + std::to_string(values.size()) + ", expected " +
                  std::to_string(n));
      for (double x : values)
        require(x >= 0.0 && x <= 1.0, ErrorCode::InvalidInput,
                "explicit init entries must lie in [0,1]");
      u = values;
      break;
  }
  return u;
}

void VipsConfig::validate() const {
  require(p_hat > 0.0 && p_hat < 1.0 && q_hat > 0.0 && q_hat < 1.0,
          ErrorCode::InvalidConfig, "p_hat and q_hat must lie in (0,1)");
  require(pi > 0.0 && pi < 1.0, ErrorCode::InvalidConfig, "pi must lie in (0,1)");
  require(tol > 0.0, ErrorCode::InvalidConfig, "tol must be positive");
  require(max_meta_iters >= 1, ErrorCode::InvalidConfig, "max_meta_iters must be >= 1");
  require(param_update_start >= 1, ErrorCode::InvalidConfig,
          "param_update_start must be >= 1");
}

void VipsState::set_psi(std::span<const double> p10, std::span<const double> p01,
                        std::span<const double> p11) {
  require(p10.size() == m && p01.size() == m && p11.size() == m, ErrorCode::InvalidInput,
          "psi vectors must have length m");
  psi10.assign(p10.begin(), p10.end());
  psi01.assign(p01.begin(), p01.end());
  psi11.assign(p11.begin(), p11.end());
  psi00.resize(m);
  phi.resize(m);
  xi.resize(m);
  theta10.resize(m);
  theta01.resize(m);
  theta11.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    psi00[k] = 1.0 - psi10[k] - psi01[k] - psi11[k];
    phi[k] = psi10[k] + psi11[k];
    xi[k] = psi01[k] + psi11[k];
    const double base = std::log(std::max(psi00[k], kLogFloor));
    theta10[k] = std::log(std::max(psi10[k], kLogFloor)) - base;
    theta01[k] = std::log(std::max(psi01[k], kLogFloor)) - base;
    theta11[k] = std::log(std::max(psi11[k], kLogFloor)) - base;
  }
  u.assign(phi.begin(), phi.end());
  u.insert(u.end(), xi.begin(), xi.end());
}

VipsState init_state(std::size_t n, const VipsConfig& config, std::uint64_t seed) {
  require(n % 2 == 0 && n > 0, ErrorCode::InvalidInput,
          "VIPS needs a positive even node count, got " + std::to_string(n));
  const std::size_t m = n / 2;
  VipsState s;
  s.m = m;
  s.theta10.assign(m, 0.0);
  s.theta01.assign(m, 0.0);
  s.theta11.assign(m, 0.0);
  s.psi00.assign(m, 0.25);
  s.psi01.assign(m, 0.25);
  s.psi10.assign(m, 0.25);
  s.psi11.assign(m, 0.25);
  // The first update reads u0 through phi and xi; psi catches up on the
  // first refresh.
  s.u = config.init.draw(n, seed);
  s.phi.assign(s.u.begin(), s.u.begin() + static_cast<std::ptrdiff_t>(m));
  s.xi.assign(s.u.begin() + static_cast<std::ptrdiff_t>(m), s.u.end());
  return s;
}

std::vector<double> update_theta10(const VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts) {
  check_dims(state, blocks);
  const std::size_t m = state.m;
  const auto phi_c = centered(state.phi);
  const auto xi_c = centered(state.xi);
  std::vector<double> zz(m), zy(m), out(m);
  shifted_product(blocks.a_zz, phi_c, consts.lambda, nullptr, zz);
  shifted_product(blocks.a_zy, xi_c, consts.lambda, &blocks.a_zy_diag, zy);
  const double t = consts.t;
  for (std::size_t k = 0; k < m; ++k)
    out[k] = 4.0 * t * zz[k] + 4.0 * t * zy[k] -
             2.0 * t * (blocks.a_zy_diag[k] - consts.lambda);
  return out;
}

std::vector<double> update_theta01(const VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts) {
  check_dims(state, blocks);
  const std::size_t m = state.m;
  const auto phi_c = centered(state.phi);
  const auto xi_c = centered(state.xi);
  std::vector<double> yy(m), yz(m), out(m);
  shifted_product(blocks.a_yy, xi_c, consts.lambda, nullptr, yy);
  shifted_product(blocks.a_yz, phi_c, consts.lambda, &blocks.a_zy_diag, yz);
  const double t = consts.t;
  for (std::size_t k = 0; k < m; ++k)
    out[k] = 4.0 * t * yy[k] + 4.0 * t * yz[k] -
             2.0 * t * (blocks.a_zy_diag[k] - consts.lambda);
  return out;
}

std::vector<double> update_theta11(const VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts) {
  check_dims(state, blocks);
  const std::size_t m = state.m;
  const auto phi_c = centered(state.phi);
  const auto xi_c = centered(state.xi);
  std::vector<double> zz(m), zy(m), yy(m), yz(m), out(m);
  shifted_product(blocks.a_zz, phi_c, consts.lambda, nullptr, zz);
  shifted_product(blocks.a_zy, xi_c, consts.lambda, &blocks.a_zy_diag, zy);
  shifted_product(blocks.a_yy, xi_c, consts.lambda, nullptr, yy);
  shifted_product(blocks.a_yz, phi_c, consts.lambda, &blocks.a_zy_diag, yz);
  const double t = consts.t;
  for (std::size_t k = 0; k < m; ++k)
    out[k] = 4.0 * t * zz[k] + 4.0 * t * zy[k] + 4.0 * t * yy[k] + 4.0 * t * yz[k];
  return out;
}

void unbalanced_adjustment(std::span<double> theta10, std::span<double> theta01,
                           std::span<double> theta11, double pi) {
  require(pi > 0.0 && pi < 1.0, ErrorCode::InvalidConfig, "pi must lie in (0,1)");
  const double shift = std::log(pi / (1.0 - pi));
  if (shift == 0.0) return;
  for (auto& v : theta10) v += shift;
  for (auto& v : theta01) v += shift;
  for (auto& v : theta11) v += 2.0 * shift;
}

void refresh(VipsState& s) {
  const std::size_t m = s.m;
  s.psi00.resize(m);
  s.psi01.resize(m);
  s.psi10.resize(m);
  s.psi11.resize(m);
  s.phi.resize(m);
  s.xi.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = s.theta10[k];
    const double b = s.theta01[k];
    const double c = s.theta11[k];
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
      fail(ErrorCode::Numeric, "non-finite logit at pair " + std::to_string(k));
    const double top = std::max({0.0, a, b, c});
    const double e00 = shifted_exp(0.0, top);
    const double e10 = shifted_exp(a, top);
    const double e01 = shifted_exp(b, top);
    const double e11 = shifted_exp(c, top);
    const double z = e00 + e10 + e01 + e11;
    s.psi00[k] = e00 / z;
    s.psi10[k] = e10 / z;
    s.psi01[k] = e01 / z;
    s.psi11[k] = e11 / z;
    s.phi[k] = s.psi10[k] + s.psi11[k];
    s.xi[k] = s.psi01[k] + s.psi11[k];
  }
  s.u.resize(2 * m);
  std::copy(s.phi.begin(), s.phi.end(), s.u.begin());
  std::copy(s.xi.begin(), s.xi.end(), s.u.begin() + static_cast<std::ptrdiff_t>(m));
}

InvariantViolation check_invariants(const VipsState& s) {
  InvariantViolation v;
  for (std::size_t k = 0; k < s.m; ++k) {
    const double sum = s.psi00[k] + s.psi01[k] + s.psi10[k] + s.psi11[k];
    v.simplex = std::max(v.simplex, std::abs(sum - 1.0));
    for (double p : {s.psi00[k], s.psi01[k], s.psi10[k], s.psi11[k]})
      v.simplex = std::max(v.simplex, -p);
    v.marginals = std::max(v.marginals, std::abs(s.phi[k] - (s.psi10[k] + s.psi11[k])));
    v.marginals = std::max(v.marginals, std::abs(s.xi[k] - (s.psi01[k] + s.psi11[k])));
    v.marginals = std::max(v.marginals, std::abs(s.u[k] - s.phi[k]));
    v.marginals = std::max(v.marginals, std::abs(s.u[s.m + k] - s.xi[k]));
  }
  return v;
}

MetaIterationResult meta_iteration(VipsState& state, const BlockViews& blocks,
                                   const LogitConstants& consts, double pi) {
  require(pi > 0.0 && pi < 1.0, ErrorCode::InvalidConfig, "pi must lie in (0,1)");
  const double prior = std::log(pi / (1.0 - pi));
  MetaIterationResult out;

  state.theta10 = update_theta10(state, blocks, consts);
  for (auto& v : state.theta10) v += prior;
  refresh(state);
  out.u[0] = state.u;

  state.theta01 = update_theta01(state, blocks, consts);
  for (auto& v : state.theta01) v += prior;
  refresh(state);
  out.u[1] = state.u;

  state.theta11 = update_theta11(state, blocks, consts);
  for (auto& v : state.theta11) v += 2.0 * prior;
  refresh(state);
  out.u[2] = state.u;
  return out;
}

ParameterEstimate update_parameters(const VipsState& s, const BlockViews& blocks) {
  require(s.m == blocks.m(), ErrorCode::InvalidInput,
          "state and block views disagree on the pair count");
  const std::size_t m = s.m;
  const auto& d = blocks.a_zy_diag;

  // Quadratic forms over the off-pair adjacency A' (pair dyads removed).
  std::vector<double> t1(m), t2(m);
  blocks.a_zz.multiply(s.phi, t1);
  blocks.a_yy.multiply(s.xi, t2);
  double q_zz = 0.0, q_yy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    q_zz += s.phi[k] * t1[k];
    q_yy += s.xi[k] * t2[k];
  }
  blocks.a_zy.multiply(s.xi, t1);
  double q_zy = 0.0;
  for (std::size_t k = 0; k < m; ++k) q_zy += s.phi[k] * (t1[k] - d[k] * s.xi[k]);
  const double uau = q_zz + q_yy + 2.0 * q_zy;  // u' A' u

  // 1' A' u = sum_i deg'_i u_i.
  std::vector<double> ones(m, 1.0), deg_z(m), deg_y(m), tmp(m);
  blocks.a_zz.multiply(ones, deg_z);
  blocks.a_zy.multiply(ones, tmp);
  for (std::size_t k = 0; k < m; ++k) deg_z[k] += tmp[k] - d[k];
  blocks.a_yy.multiply(ones, deg_y);
  blocks.a_yz.multiply(ones, tmp);
  for (std::size_t k = 0; k < m; ++k) deg_y[k] += tmp[k] - d[k];
  double one_a_u = 0.0, one_a_one = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    one_a_u += deg_z[k] * s.phi[k] + deg_y[k] * s.xi[k];
    one_a_one += deg_z[k] + deg_y[k];
  }

  // (J - I) quadratic forms over all n nodes, then remove the pair dyads.
  const double n = 2.0 * static_cast<double>(m);
  double sum_u = 0.0, sum_u2 = 0.0;
  double same_pairs = 0.0, cross_pairs = 0.0;  // ordered pair-dyad weights
  double concord = 0.0, discord = 0.0, concord_edges = 0.0, discord_edges = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double a = s.phi[k], b = s.xi[k];
    sum_u += a + b;
    sum_u2 += a * a + b * b;
    same_pairs += 2.0 * ((1.0 - a) * (1.0 - b) + a * b);
    cross_pairs += (1.0 - a) * b + a * (1.0 - b);
    const double disc = s.psi10[k] + s.psi01[k];
    concord += 1.0 - disc;
    discord += disc;
    concord_edges += (1.0 - disc) * d[k];
    discord_edges += disc * d[k];
  }
  const double sum_1mu = n - sum_u;
  const double sum_1mu2 = n - 2.0 * sum_u + sum_u2;
  const double jq_u = sum_u * sum_u - sum_u2;
  const double jq_1mu = sum_1mu * sum_1mu - sum_1mu2;
  const double jq_cross = sum_1mu * sum_u - (sum_u - sum_u2);

  const double p_num = (one_a_one - 2.0 * one_a_u + uau) + uau + 2.0 * concord_edges;
  const double p_den = jq_1mu + jq_u - same_pairs + 2.0 * concord;
  const double q_num = (one_a_u - uau) + discord_edges;
  const double q_den = jq_cross - cross_pairs + discord;

  require(p_den > 0.0, ErrorCode::Estimation,
          "p estimate has non-positive denominator " + std::to_string(p_den));
  require(q_den > 0.0, ErrorCode::Estimation,
          "q estimate has non-positive denominator " + std::to_string(q_den));
  return {clamp_probability(p_num / p_den), clamp_probability(q_num / q_den)};
}

ParameterEstimate update_parameters(const VipsState& state, const Graph& graph,
                                    const Pairing& pairing) {
  return update_parameters(state, block_views(graph, pairing));
}

VipsRun run_vips(const Graph& graph, const Pairing& pairing, const VipsConfig& config,
                 std::uint64_t seed) {
  return run_vips(graph, pairing, block_views(graph, pairing), config, seed);
}

VipsRun run_vips(const Graph& graph, const Pairing& pairing, const BlockViews& blocks,
                 const VipsConfig& config, std::uint64_t seed) {
  config.validate();
  require(graph.n() == pairing.n() && blocks.m() == pairing.m(), ErrorCode::InvalidInput,
          "graph, pairing and block views must describe the same nodes");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = graph.n();
  const std::size_t m = pairing.m();

  std::vector<int> z_pair(n);
  for (std::size_t k = 0; k < m; ++k) {
    z_pair[k] = graph.labels()[pairing.p1()[k]];
    z_pair[m + k] = graph.labels()[pairing.p2()[k]];
  }
  const bool binary = graph.k() == 2;

  VipsRun run;
  run.record.algorithm = "vips";
  run.record.seed = seed;
  run.p_hat = clamp_probability(config.p_hat);
  run.q_hat = clamp_probability(config.q_hat);
  LogitConstants consts = logit_constants_or_limit(run.p_hat, run.q_hat);
  run.state = init_state(n, config, seed);

  auto record = [&](int tick, int meta, const std::vector<double>& u, bool end_of_meta) {
    IterationMetrics it;
    it.iteration = tick;
    it.meta = meta;
    if (binary) {
      it.l1 = l1_to_truth(u, z_pair);
      it.nmi = nmi(hard_labels(u), z_pair);
      const auto sp = signal_projection(u, graph.labels(), pairing);
      it.signal_projection = sp.projection;
      it.drift = sp.drift;
    }
    if (end_of_meta) {
      it.p_hat = run.p_hat;
      it.q_hat = run.q_hat;
      if (config.record_elbo) it.elbo = elbo(run.state, blocks, run.p_hat, run.q_hat, config.pi);
    }
    run.record.iterations.push_back(it);
  };
  record(0, 0, run.state.u, false);

  int tick = 0;
  for (int meta = 1; meta <= config.max_meta_iters; ++meta) {
    const std::vector<double> before = run.state.u;
    auto snaps = meta_iteration(run.state, blocks, consts, config.pi);
    if (config.check_invariants) {
      const auto v = check_invariants(run.state);
      require(v.max() <= 1e-12, ErrorCode::Numeric,
              "state invariants violated by " + std::to_string(v.max()));
    }
    run.meta_iterations = meta;
    if (config.update_params && meta >= config.param_update_start) {
      const auto est = update_parameters(run.state, blocks);
      run.p_hat = est.p_hat;
      run.q_hat = est.q_hat;
      if (run.p_hat <= run.q_hat)
        run.record.warnings.push_back("meta " + std::to_string(meta) +
                                      ": estimated p_hat <= q_hat");
      consts = logit_constants_or_limit(run.p_hat, run.q_hat);
    }
    record(++tick, meta, snaps.u[0], false);
    record(++tick, meta, snaps.u[1], false);
    record(++tick, meta, snaps.u[2], true);

    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(run.state.u[i] - before[i]);
    change /= static_cast<double>(n);
    if (change < config.tol) {
      run.record.converged = true;
      if (!config.run_to_max) break;
    }
  }
  run.u_nodes = pairing.to_node_order(run.state.u);
  run.record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::string checkpoint_to_json(const Checkpoint& c) {
  const auto& s = c.state;
  nlohmann::json j{{"format", "sbmvi-checkpoint-1"},
                   {"m", s.m},
                   {"theta10", s.theta10},
                   {"theta01", s.theta01},
                   {"theta11", s.theta11},
                   {"psi00", s.psi00},
                   {"psi01", s.psi01},
                   {"psi10", s.psi10},
                   {"psi11", s.psi11},
                   {"phi", s.phi},
                   {"xi", s.xi},
                   {"u", s.u},
                   {"meta_iteration", c.meta_iteration},
                   {"tick", c.tick},
                   {"p_hat", c.p_hat},
                   {"q_hat", c.q_hat},
                   {"seed", c.seed},
                   {"pairing_seed", c.pairing_seed}};
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Checkpoint c;
    auto& s = c.state;
    s.m = j.at("m").get<std::size_t>();
    j.at("theta10").get_to(s.theta10);
    j.at("theta01").get_to(s.theta01);
    j.at("theta11").get_to(s.theta11);
    j.at("psi00").get_to(s.psi00);
    j.at("psi01").get_to(s.psi01);
    j.at("psi10").get_to(s.psi10);
    j.at("psi11").get_to(s.psi11);
    j.at("phi").get_to(s.phi);
    j.at("xi").get_to(s.xi);
    j.at("u").get_to(s.u);
    c.meta_iteration = j.at("meta_iteration").get<int>();
    c.tick = j.at("tick").get<int>();
    c.p_hat = j.at("p_hat").get<double>();
    c.q_hat = j.at("q_hat").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.pairing_seed = j.at("pairing_seed").get<std::uint64_t>();
    for (const auto* v : {&s.theta10, &s.theta01, &s.theta11, &s.psi00, &s.psi01, &s.psi10,
                          &s.psi11, &s.phi, &s.xi})
      require(v->size() == s.m, ErrorCode::InvalidInput, "checkpoint vector length != m");
    require(s.u.size() == 2 * s.m, ErrorCode::InvalidInput, "checkpoint u length != 2m");
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("checkpoint JSON: ") + e.what());
  }
}

}  // namespace sbmvi
