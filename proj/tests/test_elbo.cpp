#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sbmvi/elbo.hpp"
#include "sbmvi/error.hpp"

using namespace sbmvi;

TEST_CASE("closed-form ELBO matches enumeration") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 3;
    const Graph g = generate_sbm(SbmConfig::two_class(2 * m, 0.6, 0.3), derive_seed(1, "g", trial));
    const Pairing p = random_pairing(2 * m, derive_seed(1, "p", trial));
    const auto s = oracle::random_state(m, rng);
    const double pi = trial % 2 ? 0.5 : 0.2 + 0.6 * rng.uniform();
    const double want = oracle::elbo_enumerate(g, p, s, 0.6, 0.3, pi);
    CHECK(std::abs(elbo(s, block_views(g, p), 0.6, 0.3, pi) - want) <= 1e-9);
  }
}

TEST_CASE("ELBO of an empty graph at uniform psi") {
  const std::size_t m = 4, n = 8;
  const Graph g = Graph::from_edges(n, 2, std::vector<int>(n, 0), {});
  const Pairing p = random_pairing(n, 1);
  VipsState s;
  s.m = m;
  std::vector<double> q(m, 0.25);
  s.set_psi(q, q, q);
  // every dyad is same-class with probability 1/2; KL to the prior is zero
  const double dyads = n * (n - 1) / 2.0;
  const double want = dyads * 0.5 * (std::log(1 - 0.3) + std::log(1 - 0.1));
  CHECK(elbo(s, block_views(g, p), 0.3, 0.1) == doctest::Approx(want).epsilon(1e-13));
  const auto grad = elbo_grad_psi(s, block_views(g, p), 0.3, 0.1);
  const auto recon = reconstruction_gradient(s.phi, s.xi, block_views(g, p), 0.3, 0.1);
  for (std::size_t i = 0; i < m; ++i) CHECK(grad.d10[i] == recon.d10[i]);
}

TEST_CASE("product-form psi gives the mean-field KL") {
  Rng rng(5);
  const std::size_t m = 3;
  const Graph g = generate_sbm(SbmConfig::two_class(6, 0.5, 0.2), 5);
  const Pairing p = random_pairing(6, 5);
  std::vector<double> phi(m), xi(m), a(m), b(m), c(m);
  for (std::size_t i = 0; i < m; ++i) {
    phi[i] = 0.1 + 0.8 * rng.uniform();
    xi[i] = 0.1 + 0.8 * rng.uniform();
    a[i] = phi[i] * (1 - xi[i]);
    b[i] = (1 - phi[i]) * xi[i];
    c[i] = phi[i] * xi[i];
  }
  VipsState s;
  s.m = m;
  s.set_psi(a, b, c);
  const double with_kl = elbo(s, block_views(g, p), 0.5, 0.2);
  // the likelihood part is shared; the KL part is the sum of Bernoulli KLs
  auto kl = [](double x) { return x * std::log(2 * x) + (1 - x) * std::log(2 * (1 - x)); };
  double bern = 0;
  for (std::size_t i = 0; i < m; ++i) bern += kl(phi[i]) + kl(xi[i]);
  const double enumerated = oracle::elbo_enumerate(g, p, s, 0.5, 0.2, 0.5);
  CHECK(with_kl == doctest::Approx(enumerated).epsilon(1e-12));
  // enumeration with the entropy replaced by the Bernoulli KL path
  double entropy = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (double v : {s.psi00[i], s.psi01[i], s.psi10[i], s.psi11[i]}) entropy -= v * std::log(v);
  const double prior = -2.0 * m * std::log(2.0);
  const double loglik = enumerated - entropy - prior;
  CHECK(with_kl == doctest::Approx(loglik - bern).epsilon(1e-12));
}

TEST_CASE("analytic psi gradients match central differences") {
  Rng rng(77);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = trial % 2 ? 5 : 3;
    const Graph g =
        generate_sbm(SbmConfig::two_class(2 * m, 0.5, 0.2), derive_seed(77, "g", trial));
    const Pairing p = random_pairing(2 * m, derive_seed(77, "p", trial));
    const auto blocks = block_views(g, p);
    const double pi = 0.5 + 0.3 * (rng.uniform() - 0.5);
    const auto s = oracle::random_state(m, rng, 0.2);
    const auto grad = elbo_grad_psi(s, blocks, 0.5, 0.2, pi);
    for (int cell = 0; cell < 3; ++cell)
      for (std::size_t i = 0; i < m; ++i) {
        auto shifted = [&](double dv) {
          auto a = s.psi10, b = s.psi01, c = s.psi11;
          (cell == 0 ? a : cell == 1 ? b : c)[i] += dv;
          VipsState t;
          t.m = m;
          t.set_psi(a, b, c);
          return elbo(t, blocks, 0.5, 0.2, pi);
        };
        const double fd = (shifted(h) - shifted(-h)) / (2 * h);
        const double an = (cell == 0 ? grad.d10 : cell == 1 ? grad.d01 : grad.d11)[i];
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(std::abs(an), 1.0));
      }
  }
}

TEST_CASE("jointly solved logits zero the gradient at frozen marginals") {
  Rng rng(8);
  const Graph g = generate_sbm(SbmConfig::two_class(20, 0.5, 0.2), 8);
  const Pairing p = random_pairing(20, 8);
  const auto blocks = block_views(g, p);
  const auto c = logit_constants(0.5, 0.2);
  auto s = oracle::random_state(10, rng);
  const auto phi = s.phi, xi = s.xi;
  s.theta10 = update_theta10(s, blocks, c);
  s.theta01 = update_theta01(s, blocks, c);
  s.theta11 = update_theta11(s, blocks, c);
  refresh(s);
  const auto recon = reconstruction_gradient(phi, xi, blocks, 0.5, 0.2);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(std::abs(recon.d10[i] - std::log(s.psi10[i] / s.psi00[i])) <= 1e-8);
    CHECK(std::abs(recon.d01[i] - std::log(s.psi01[i] / s.psi00[i])) <= 1e-8);
    CHECK(std::abs(recon.d11[i] - std::log(s.psi11[i] / s.psi00[i])) <= 1e-8);
  }
}

TEST_CASE("gradient needs interior psi") {
  const Graph g = generate_sbm(SbmConfig::two_class(6, 0.5, 0.2), 1);
  const Pairing p = random_pairing(6, 1);
  VipsState s;
  s.m = 3;
  s.set_psi(std::vector<double>{1, 0, 0}, std::vector<double>{0, 0, 0},
            std::vector<double>{0, 0, 0});
  CHECK_THROWS_AS(elbo_grad_psi(s, block_views(g, p), 0.5, 0.2), Error);
  CHECK(std::isfinite(elbo(s, block_views(g, p), 0.5, 0.2)));
  CHECK_THROWS_AS(elbo(s, block_views(g, p), 1.5, 0.2), Error);
}
