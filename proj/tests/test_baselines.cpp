#include <doctest.h>

#include <cmath>
#include <numeric>

#include "sbmvi/baselines.hpp"
#include "sbmvi/error.hpp"
#include "sbmvi/metrics.hpp"
#include "sbmvi/random.hpp"

using namespace sbmvi;

namespace {

Graph two_cliques(std::size_t size) {
  std::vector<Entry> edges;
  std::vector<int> labels(2 * size);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t i = 0; i < size; ++i) {
      labels[c * size + i] = static_cast<int>(c);
      for (std::size_t j = i + 1; j < size; ++j)
        edges.push_back({static_cast<Index>(c * size + i), static_cast<Index>(c * size + j)});
    }
  return Graph::from_edges(2 * size, 2, labels, edges);
}

double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d / static_cast<double>(a.size());
}

}  // namespace

TEST_CASE("MFVI sweep matches its defining formula") {
  const Graph g = generate_sbm(SbmConfig::two_class(30, 0.4, 0.1), 1);
  const auto c = logit_constants(0.4, 0.1);
  Rng rng(1);
  std::vector<double> u(30);
  for (auto& v : u) v = rng.uniform();
  const auto next = mfvi_sweep(g, u, c, 0.4);
  for (std::size_t i = 0; i < 30; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < 30; ++j)
      if (j != i) s += (g.has_edge(i, j) - c.lambda) * (u[j] - 0.5);
    const double logit = 4 * c.t * s + std::log(0.4 / 0.6);
    CHECK(next[i] == doctest::Approx(1 / (1 + std::exp(-logit))).epsilon(1e-13));
  }
}

TEST_CASE("K-class MFVI sweep at K = 2 agrees with the binary sweep") {
  const Graph g = generate_sbm(SbmConfig::two_class(40, 0.4, 0.1), 2);
  const auto c = logit_constants(0.4, 0.1);
  Rng rng(2);
  std::vector<double> u(40), rows(80);
  for (std::size_t i = 0; i < 40; ++i) {
    u[i] = rng.uniform();
    rows[2 * i] = 1 - u[i];
    rows[2 * i + 1] = u[i];
  }
  const auto a = mfvi_sweep(g, u, c);
  const std::vector<double> pi = {0.5, 0.5};
  const auto b = mfvi_sweep_general(g, rows, 2, c, pi);
  for (std::size_t i = 0; i < 40; ++i) CHECK(std::abs(a[i] - b[2 * i + 1]) <= 1e-12);
}

TEST_CASE("all-zero and all-one vectors are MFVI fixed points") {
  const Graph g = generate_sbm(SbmConfig::two_class(2000, 0.2, 0.01), 3);
  const auto c = logit_constants(0.2, 0.01);
  for (double v : {0.0, 1.0}) {
    const std::vector<double> u(2000, v);
    CHECK(mean_abs_diff(mfvi_sweep(g, u, c), u) < 1e-6);
  }
}

TEST_CASE("MFVI converges from a nearby start and records iterations") {
  const Graph g = generate_sbm(SbmConfig::two_class(400, 0.3, 0.05), 4);
  MfviConfig cfg;
  cfg.p_hat = 0.3;
  cfg.q_hat = 0.05;
  std::vector<double> u(400);
  for (std::size_t i = 0; i < 400; ++i) u[i] = g.labels()[i] ? 0.7 : 0.3;
  cfg.init = InitSpec::explicit_vector(u);
  const auto run = run_mfvi(g, cfg, 1);
  CHECK(run.record.converged);
  CHECK(run.record.final().l1 < 1e-6);
  CHECK(run.record.iterations.size() == static_cast<std::size_t>(run.iterations + 1));
  CHECK(run.labels.size() == 400);
}

TEST_CASE("MFVI parameter estimates at the truth") {
  const Graph g = generate_sbm(SbmConfig::two_class(200, 0.3, 0.1), 5);
  std::vector<double> u(g.labels().begin(), g.labels().end());
  const auto est = mfvi_parameters(g, u, 2);
  double within = 0, nw = 0, between = 0, nb = 0;
  for (std::size_t i = 0; i < 200; ++i)
    for (std::size_t j = i + 1; j < 200; ++j) {
      const bool same = g.labels()[i] == g.labels()[j];
      (same ? within : between) += g.has_edge(i, j);
      (same ? nw : nb) += 1;
    }
  CHECK(est.p_hat == doctest::Approx(within / nw).epsilon(1e-12));
  CHECK(est.q_hat == doctest::Approx(between / nb).epsilon(1e-12));
}

TEST_CASE("spectral clustering splits two cliques") {
  const Graph g = two_cliques(5);
  const auto r = spectral_cluster(g, 2, 1);
  CHECK(exact_recovery(r.labels, g.labels(), 2));
}

TEST_CASE("spectral clustering of the rank-2 population matrix recovers the truth") {
  const std::size_t n = 60;
  const double p = 0.3, q = 0.1;
  Rng rng(6);
  std::vector<int> z(n, 0);
  for (std::size_t i = 0; i < n / 2; ++i) z[i] = 1;
  rng.shuffle(std::span<int>(z));
  LinearOperator op = [&](std::span<const double> x, std::span<double> y) {
    double total = 0, signal = 0;
    for (std::size_t i = 0; i < n; ++i) {
      total += x[i];
      signal += (z[i] ? 1.0 : -1.0) * x[i];
    }
    for (std::size_t i = 0; i < n; ++i)
      y[i] = 0.5 * (p + q) * total + 0.5 * (p - q) * (z[i] ? 1.0 : -1.0) * signal;
  };
  const auto r = spectral_cluster_operator(op, n, 2, 0.0, 1);
  CHECK(exact_recovery(r.labels, z, 2));
  CHECK(r.eigenvalues[0] == doctest::Approx(0.5 * (p + q) * n).epsilon(1e-8));
  CHECK(r.eigenvalues[1] == doctest::Approx(0.5 * (p - q) * n).epsilon(1e-8));
}

TEST_CASE("spectral labels are invariant to relabeling the nodes") {
  const Graph g = generate_sbm(SbmConfig::two_class(200, 0.3, 0.05), 7);
  std::vector<Index> perm(200);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(7);
  rng.shuffle(std::span<Index>(perm));
  std::vector<Entry> edges;
  for (auto [i, j] : g.edges()) edges.push_back({perm[i], perm[j]});
  std::vector<int> labels(200);
  for (std::size_t i = 0; i < 200; ++i) labels[perm[i]] = g.labels()[i];
  const Graph h = Graph::from_edges(200, 2, labels, edges);
  const auto a = spectral_cluster(g, 2, 1).labels;
  const auto b = spectral_cluster(h, 2, 1).labels;
  std::vector<int> b_back(200);
  for (std::size_t i = 0; i < 200; ++i) b_back[i] = b[perm[i]];
  CHECK(nmi(a, b_back) == doctest::Approx(1.0));
}

TEST_CASE("k-means separates well-spaced clusters") {
  std::vector<double> pts;
  Rng rng(8);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 20; ++i) {
      pts.push_back(10.0 * c + 0.1 * rng.normal());
      pts.push_back(-5.0 * c + 0.1 * rng.normal());
    }
  const auto labels = kmeans(pts, 2, 3, 5, 1);
  std::vector<int> truth(60);
  for (int i = 0; i < 60; ++i) truth[i] = i / 20;
  CHECK(exact_recovery(labels, truth, 3));
}

TEST_CASE("BP recovers two cliques and stays uniform without signal") {
  const Graph g = two_cliques(6);
  const std::vector<double> pi = {0.5, 0.5};
  const auto r = run_bp(g, 1 - 1e-6, 1e-6, pi, 2, BpConfig{}, 1);
  CHECK(exact_recovery(r.labels, g.labels(), 2));

  const Graph flat = generate_sbm(SbmConfig::two_class(200, 0.1, 0.1 + 1e-12), 2);
  const auto u = run_bp(flat, 0.1, 0.1, pi, 2, BpConfig{}, 2);
  for (double b : u.beliefs) CHECK(b == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("BP beliefs are normalized and runs are deterministic") {
  const Graph g = generate_sbm(SbmConfig::planted(300, 3, 0.2, 0.02), 9);
  const std::vector<double> pi(3, 1.0 / 3);
  const auto a = run_bp(g, 0.2, 0.02, pi, 3, BpConfig{}, 4);
  const auto b = run_bp(g, 0.2, 0.02, pi, 3, BpConfig{}, 4);
  CHECK(a.beliefs == b.beliefs);
  for (std::size_t i = 0; i < 300; ++i)
    CHECK(a.beliefs[3 * i] + a.beliefs[3 * i + 1] + a.beliefs[3 * i + 2] ==
          doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.record.final().nmi > 0.9);
}

TEST_CASE("baseline config validation") {
  MfviConfig c;
  c.k = 1;
  CHECK_THROWS_AS(c.validate(), Error);
}
