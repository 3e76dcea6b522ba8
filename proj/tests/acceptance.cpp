#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sbmvi/baselines.hpp"
#include "sbmvi/elbo.hpp"
#include "sbmvi/harness.hpp"
#include "sbmvi/metrics.hpp"
#include "sbmvi/vips.hpp"
#include "sbmvi/vips_general.hpp"

using namespace sbmvi;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class F>
int count_if(const std::vector<double>& v, F f) {
  return static_cast<int>(std::count_if(v.begin(), v.end(), f));
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? kNaN : s / static_cast<double>(v.size());
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------

void convergence_criteria() {
  auto c = ExperimentConfig::defaults(ExperimentKind::Convergence);
  const auto start = Clock::now();
  const auto r = run_experiment(c);
  const double secs = seconds_since(start);
  const double tol = 0.001 * static_cast<double>(c.n);
  const double stuck = 0.45 * static_cast<double>(c.n);

  bool ok1 = secs <= 60.0;
  std::string d1;
  for (double mu : c.mus) {
    const std::string key = "convergence/" + key_value("mu", mu);
    const int tick = mu == 0.5 ? 6 : 9;
    const auto l1 = trial_values(r.rows, key, "vips", "l1", tick);
    const int hits = count_if(l1, [&](double v) { return v <= tol; });
    ok1 = ok1 && hits >= 19;
    d1 += key_value("mu", mu) + " " + std::to_string(hits) + "/" + std::to_string(l1.size()) +
          " by tick " + std::to_string(tick) + "; ";
  }
  report(1, ok1, d1 + fmt("%.1f s for VIPS and MFVI", secs));

  bool ok2 = true;
  std::string d2;
  for (double mu : c.mus) {
    const std::string key = "convergence/" + key_value("mu", mu);
    const auto l1 = trial_values(r.rows, key, "mfvi", "l1");
    const int conv = count_if(l1, [&](double v) { return v <= tol; });
    const int fail = count_if(l1, [&](double v) { return v >= stuck; });
    if (mu == 0.5)
      ok2 = ok2 && conv >= 1 && fail >= 1;
    else
      ok2 = ok2 && fail == static_cast<int>(l1.size()) && l1.size() == 20;
    d2 += key_value("mu", mu) + " converged " + std::to_string(conv) + ", stuck " +
          std::to_string(fail) + "; ";
  }
  report(2, ok2, d2);
}

void escape_criterion() {
  const std::size_t n = 2000;
  const Graph g = generate_sbm(SbmConfig::two_class(n, 0.2, 0.01), derive_seed(3, "graph", 0));
  const Pairing p = random_pairing(n, derive_seed(3, "pairing", 0));
  const auto consts = logit_constants(0.2, 0.01);
  bool ok = true;
  std::string d;
  for (double c0 : {0.0, 1.0}) {
    VipsConfig cfg;
    cfg.p_hat = 0.2;
    cfg.q_hat = 0.01;
    cfg.init = InitSpec::constant(c0);
    cfg.max_meta_iters = 3;
    cfg.run_to_max = true;
    cfg.record_elbo = false;
    const auto run = run_vips(g, p, cfg, 1);
    const double l1 = run.record.final().l1;
    const std::vector<double> u(n, c0);
    const auto next = mfvi_sweep(g, u, consts);
    double moved = 0;
    for (std::size_t i = 0; i < n; ++i) moved += std::abs(next[i] - u[i]);
    moved /= static_cast<double>(n);
    ok = ok && l1 <= 0.001 * n && moved < 1e-6;
    d += "u0=" + fmt("%g", c0) + " VIPS l1 " + fmt("%g", l1) + ", MFVI mean move " +
         fmt("%.2e", moved) + "; ";
  }
  report(3, ok, d);
}

void heatmap_criterion() {
  auto c = ExperimentConfig::defaults(ExperimentKind::Heatmap);
  c.p_grid = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4};
  c.q_grid = c.p_grid;
  c.trials = 10;
  const auto start = Clock::now();
  const auto r = run_experiment(c);
  const double secs = seconds_since(start);
  int vips_cells = 0, mfvi_cells = 0;
  double truth_cell = kNaN;
  for (double ph : c.p_grid)
    for (double qh : c.q_grid) {
      if (qh >= ph) continue;
      const std::string key = "heatmap/" + key_value("p_hat", ph) + "/" + key_value("q_hat", qh);
      const double v = mean(trial_values(r.rows, key, "vips", "nmi"));
      const double m = mean(trial_values(r.rows, key, "mfvi", "nmi"));
      vips_cells += v > 0.9;
      mfvi_cells += m > 0.9;
      if (ph == 0.2 && qh == 0.1) truth_cell = v;
    }
  report(4, truth_cell > 0.95 && vips_cells > mfvi_cells && secs <= 600.0,
         fmt("VIPS NMI at truth %.4f; ", truth_cell) + "cells above 0.9: VIPS " +
             std::to_string(vips_cells) + ", MFVI " + std::to_string(mfvi_cells) +
             fmt("; %.1f s", secs));
}

void recovery_criterion() {
  const std::size_t n = 2000;
  int good = 0;
  double worst_p = 0, worst_q = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto seed = derive_seed(5, "trial", static_cast<std::uint64_t>(trial));
    const Graph g = generate_sbm(SbmConfig::two_class(n, 0.2, 0.1), derive_seed(seed, "graph", 0));
    const Pairing p = random_pairing(n, derive_seed(seed, "pairing", 0));
    VipsConfig cfg;
    cfg.p_hat = g.density();
    cfg.q_hat = g.density() / 2;
    cfg.update_params = true;
    cfg.param_update_start = 3;
    cfg.record_elbo = false;
    const auto run = run_vips(g, p, cfg, derive_seed(seed, "init", 0));
    const double dp = std::abs(run.p_hat - 0.2), dq = std::abs(run.q_hat - 0.1);
    worst_p = std::max(worst_p, dp);
    worst_q = std::max(worst_q, dq);
    const bool exact = exact_recovery(hard_labels(run.u_nodes), g.labels(), 2);
    good += dp <= 0.01 && dq <= 0.01 && exact;
  }
  report(5, good >= 18,
         std::to_string(good) + "/20 within 0.01 with exact labels" +
             fmt("; max |p_hat - p| %.4f", worst_p) + fmt(", max |q_hat - q| %.4f", worst_q));
}

void sweep_criterion() {
  auto c = ExperimentConfig::defaults(ExperimentKind::Sweep);
  c.sweep = "ratio";
  c.ratios = {1, 3, 4};
  const auto r = run_experiment(c);
  bool ok = true;
  std::string d;
  for (double ratio : c.ratios) {
    const std::string key = "sweep/" + key_value("ratio", ratio);
    const double v = mean(trial_values(r.rows, key, "vips", "nmi"));
    const double m = mean(trial_values(r.rows, key, "mfvi", "nmi"));
    d += key_value("ratio", ratio) + fmt(" VIPS %.3f", v) + fmt(" MFVI %.3f", m);
    if (ratio == 1) {
      double worst = v;
      for (const char* a : {"mfvi", "bp", "spectral"})
        worst = std::max(worst, mean(trial_values(r.rows, key, a, "nmi")));
      ok = ok && worst <= 0.05;
      d += fmt(" max over methods %.3f", worst);
    } else {
      ok = ok && v >= 0.95 && v >= m - 0.02;
    }
    d += "; ";
  }
  report(6, ok, d);
}

// ---------------------------------------------------------------------------

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void oracle_criterion() {
  Rng rng(7);
  std::string d;
  bool ok = true;

  // a. ELBO vs enumeration, m = 3
  double a = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Graph g = generate_sbm(SbmConfig::two_class(6, 0.6, 0.3), derive_seed(71, "g", trial));
    const Pairing p = random_pairing(6, derive_seed(71, "p", trial));
    const auto s = oracle::random_state(3, rng);
    a = std::max(a, std::abs(elbo(s, block_views(g, p), 0.6, 0.3) -
                             oracle::elbo_enumerate(g, p, s, 0.6, 0.3, 0.5)));
  }
  ok = ok && a <= 1e-9;
  d += fmt("a %.1e; ", a);

  // b. gradients vs central differences
  double b = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 4;
    const Graph g = generate_sbm(SbmConfig::two_class(2 * m, 0.5, 0.2), derive_seed(72, "g", trial));
    const Pairing p = random_pairing(2 * m, derive_seed(72, "p", trial));
    const auto blocks = block_views(g, p);
    const auto s = oracle::random_state(m, rng, 0.2);
    const auto grad = elbo_grad_psi(s, blocks, 0.5, 0.2);
    for (int cell = 0; cell < 3; ++cell)
      for (std::size_t i = 0; i < m; ++i) {
        auto at = [&](double h) {
          auto x = s.psi10, y = s.psi01, z = s.psi11;
          (cell == 0 ? x : cell == 1 ? y : z)[i] += h;
          VipsState t;
          t.m = m;
          t.set_psi(x, y, z);
          return elbo(t, blocks, 0.5, 0.2);
        };
        const double fd = (at(1e-6) - at(-1e-6)) / 2e-6;
        const double an = (cell == 0 ? grad.d10 : cell == 1 ? grad.d01 : grad.d11)[i];
        b = std::max(b, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
      }
  }
  ok = ok && b <= 1e-5;
  d += fmt("b %.1e; ", b);

  // c. vectorized vs scalar-loop theta updates, m <= 10
  double cdiff = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 10);
    const Graph g = generate_sbm(SbmConfig::two_class(2 * m, 0.6, 0.2), derive_seed(73, "g", trial));
    const Pairing p = random_pairing(2 * m, derive_seed(73, "p", trial));
    const auto blocks = block_views(g, p);
    const auto k = logit_constants(0.6, 0.2);
    const auto s = oracle::random_state(m, rng);
    const auto want = oracle::theta_loops(g, p, s.phi, s.xi, k.t, k.lambda);
    cdiff = std::max({cdiff, max_abs(update_theta10(s, blocks, k), want.t10),
                      max_abs(update_theta01(s, blocks, k), want.t01),
                      max_abs(update_theta11(s, blocks, k), want.t11)});
  }
  ok = ok && cdiff <= 1e-12;
  d += fmt("c %.1e; ", cdiff);

  // d. K-class engine at K = 2 vs the two-class engine, every inner step
  double ddiff = 0;
  {
    const std::size_t n = 400;
    const Graph g = generate_sbm(SbmConfig::two_class(n, 0.2, 0.05), 74);
    const Pairing p = random_pairing(n, 75);
    const auto blocks = block_views(g, p);
    const auto k = logit_constants(0.2, 0.05);
    VipsState two = init_state(n, VipsConfig{}, 76);
    std::vector<double> mat(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      mat[2 * j] = 1 - two.u[j];
      mat[2 * j + 1] = two.u[j];
    }
    GeneralVipsConfig gc;
    gc.k = 2;
    gc.init = GeneralInitSpec::explicit_matrix(mat);
    GeneralVipsState gen = init_general_state(n, gc, 76);
    const std::vector<double> prior = {0.5, 0.5};
    for (int it = 0; it < 10; ++it) {
      const auto x = meta_iteration(two, blocks, k);
      const auto y = general_meta_iteration(gen, blocks, k, prior);
      for (int step = 0; step < 3; ++step)
        for (std::size_t j = 0; j < n; ++j)
          ddiff = std::max(ddiff, std::abs(x.u[step][j] - y.u[step][2 * j + 1]));
    }
  }
  ok = ok && ddiff <= 1e-12;
  d += fmt("d %.1e; ", ddiff);

  // e. simplex and marginal invariants over 50 meta iterations
  double e = 0;
  {
    const Graph g = generate_sbm(SbmConfig::two_class(1000, 0.2, 0.05), 77);
    const Pairing p = random_pairing(1000, 78);
    const auto blocks = block_views(g, p);
    const auto k = logit_constants(0.2, 0.05);
    VipsState s = init_state(1000, VipsConfig{}, 79);
    for (int it = 0; it < 50; ++it) {
      s.theta10 = update_theta10(s, blocks, k);
      refresh(s);
      e = std::max(e, check_invariants(s).max());
      s.theta01 = update_theta01(s, blocks, k);
      refresh(s);
      e = std::max(e, check_invariants(s).max());
      s.theta11 = update_theta11(s, blocks, k);
      refresh(s);
      e = std::max(e, check_invariants(s).max());
    }
    GeneralVipsConfig gc;
    gc.k = 3;
    gc.max_meta_iters = 50;
    gc.run_to_max = true;
    const Graph g3 = generate_sbm(SbmConfig::planted(600, 3, 0.3, 0.05), 80);
    const auto run = run_vips_general(g3, random_pairing(600, 81), gc, 82);
    e = std::max(e, general_invariant_violation(run.state));
  }
  ok = ok && e <= 1e-12;
  d += fmt("e %.1e; ", e);

  // f. q < lambda < (p + q) / 2
  int f_bad = 0, f_count = 0;
  while (f_count < 1000) {
    const double p = rng.uniform(), q = rng.uniform();
    if (!(q > 0 && q < p && p + q < 1)) continue;
    ++f_count;
    const auto k = logit_constants(p, q);
    f_bad += !(q < k.lambda && k.lambda < 0.5 * (p + q));
  }
  ok = ok && f_bad == 0;
  d += "f " + std::to_string(f_bad) + "/1000 violations; ";

  // g. min-permutation l1 = m - |<u, v2>| on binary u
  double gdiff = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 50;
    const Graph g = generate_sbm(SbmConfig::two_class(n, 0.1, 0.05), derive_seed(83, "g", trial));
    const Pairing p = random_pairing(n, derive_seed(83, "p", trial));
    std::vector<double> u(n);
    for (auto& v : u) v = rng.bernoulli(0.5);
    const auto sp = signal_projection(p.to_pair_order(u), g.labels(), p);
    gdiff = std::max(gdiff, std::abs(l1_to_truth(u, g.labels()) -
                                     (static_cast<double>(n / 2) - std::abs(sp.projection))));
  }
  ok = ok && gdiff == 0.0;
  d += fmt("g %.1e", gdiff);
  report(7, ok, d);
}

void determinism_criterion() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "sbmvi_acceptance_determinism";
  bool ok = true;
  std::string d;
  auto read = [](const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (auto kind : {ExperimentKind::Convergence, ExperimentKind::Heatmap, ExperimentKind::Sweep,
                    ExperimentKind::General, ExperimentKind::Ablation}) {
    auto c = ExperimentConfig::defaults(kind);
    c.n = 200;
    c.trials = 2;
    c.degree = 20;
    c.mus = {0.1, 0.5};
    c.p_grid = {0.1, 0.2};
    c.q_grid = {0.05, 0.1};
    c.ratios = {2, 6};
    std::vector<std::string> files;
    for (int rep = 0; rep < 2; ++rep) {
      c.workers = rep + 1;
      const fs::path dir = root / (std::string(to_string(kind)) + std::to_string(rep));
      write_outputs(run_experiment(c), dir);
      files.push_back(read(dir / "results.csv"));
    }
    const bool same = !files[0].empty() && files[0] == files[1];
    ok = ok && same;
    d += std::string(to_string(kind)) + (same ? " identical; " : " differs; ");
  }
  fs::remove_all(root);
  report(8, ok, d);
}

void general_criterion() {
  auto c = ExperimentConfig::defaults(ExperimentKind::General);
  c.general = "unbalanced";
  c.ratios = {10};
  c.algorithms = {"vips", "bp"};
  const auto r = run_experiment(c);
  const std::string key = "general/" + key_value("pi", 0.3) + "/" + key_value("ratio", 10);
  const double v = mean(trial_values(r.rows, key, "vips", "nmi"));
  const double bp = mean(trial_values(r.rows, key, "bp", "nmi"));

  auto k3 = ExperimentConfig::defaults(ExperimentKind::General);
  k3.general = "raster";
  k3.trials = 100;
  k3.algorithms = {"vips", "mfvi"};
  const auto r3 = run_experiment(k3);
  const std::string key3 = "general/k=3/p=0.5/q=0.01";
  const auto ve = trial_values(r3.rows, key3, "vips", "exact");
  const auto me = trial_values(r3.rows, key3, "mfvi", "exact");
  const double vf = mean(ve), mf = mean(me);
  report(9, v >= 0.9 && vf > mf,
         fmt("pi=0.3 ratio 10 VIPS NMI %.3f", v) + fmt(" (BP %.3f); ", bp) +
             fmt("K=3 exact recovery VIPS %.2f", vf) + fmt(" vs MFVI %.2f", mf) + " over " +
             std::to_string(ve.size()) + " trials");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::pair<std::vector<int>, std::function<void()>>> suites = {
      {{1, 2}, convergence_criteria}, {{3}, escape_criterion},   {{4}, heatmap_criterion},
      {{5}, recovery_criterion},      {{6}, sweep_criterion},    {{7}, oracle_criterion},
      {{8}, determinism_criterion},   {{9}, general_criterion}};
  for (const auto& [ids, run] : suites) {
    if (!only.empty() &&
        std::none_of(ids.begin(), ids.end(), [&](int id) {
          return std::find(only.begin(), only.end(), id) != only.end();
        }))
      continue;
    try {
      run();
    } catch (const std::exception& e) {
      for (int id : ids) report(id, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
