#include <doctest.h>

#include <cmath>
#include <map>

#include "sbmvi/error.hpp"
#include "sbmvi/metrics.hpp"
#include "sbmvi/pairing.hpp"
#include "sbmvi/random.hpp"

using namespace sbmvi;

namespace {

// Direct entropy-based NMI with sqrt normalization.
double nmi_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
    pab[{a[i], b[i]}] += 1 / n;
  }
  double ha = 0, hb = 0, mi = 0;
  for (auto [k, v] : pa) ha -= v * std::log(v);
  for (auto [k, v] : pb) hb -= v * std::log(v);
  for (auto [k, v] : pab) mi += v * std::log(v / (pa[k.first] * pb[k.second]));
  return mi / std::sqrt(ha * hb);
}

}  // namespace

TEST_CASE("l1 to truth") {
  const std::vector<int> z = {0, 1, 1, 0, 1, 0};
  std::vector<double> u(z.begin(), z.end());
  CHECK(l1_to_truth(u, z) == 0.0);
  for (auto& v : u) v = 1 - v;
  CHECK(l1_to_truth(u, z) == 0.0);
  CHECK(l1_to_truth(std::vector<double>(6, 0.5), z) == 3.0);
  CHECK(l1_to_truth(std::vector<double>{1, 1, 1, 1, 1, 1}, z) == 3.0);
  CHECK_THROWS_AS(l1_to_truth(std::vector<double>(5, 0.5), z), Error);
}

TEST_CASE("general l1 minimizes over label permutations") {
  const std::vector<int> z = {0, 1, 2, 2};
  // one-hot memberships with labels 0->2, 1->0, 2->1
  const std::vector<double> u = {0, 0, 1, 1, 0, 0, 0, 1, 0, 0, 1, 0};
  CHECK(l1_to_truth_general(u, z, 3) == 0.0);
  const std::vector<double> flat(12, 1.0 / 3);
  CHECK(l1_to_truth_general(flat, z, 3) == doctest::Approx(4 * 2.0 / 3));
}

TEST_CASE("nmi") {
  const std::vector<int> a = {0, 0, 1, 1, 2, 2};
  CHECK(nmi(a, a) == doctest::Approx(1.0));
  CHECK(nmi(a, std::vector<int>{5, 5, 3, 3, 4, 4}) == doctest::Approx(1.0));
  CHECK(nmi(std::vector<int>(6, 0), a) == 0.0);
  CHECK(nmi(std::vector<int>(6, 0), std::vector<int>(6, 1)) == 1.0);
  CHECK(std::abs(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1})) < 1e-15);
  CHECK_THROWS_AS(nmi(std::vector<int>{}, std::vector<int>{}), Error);

  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> x(60), y(60);
    for (auto& v : x) v = static_cast<int>(rng.below(3));
    for (auto& v : y) v = static_cast<int>(rng.below(4));
    const double value = nmi(x, y);
    CHECK(value == doctest::Approx(nmi_oracle(x, y)).epsilon(1e-12));
    CHECK(value == doctest::Approx(nmi(y, x)).epsilon(1e-14));
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
  }
}

TEST_CASE("hard labels threshold at one half") {
  CHECK(hard_labels(std::vector<double>{0.2, 0.5, 0.7}) == std::vector<int>{0, 1, 1});
  CHECK(hard_labels_general(std::vector<double>{0.1, 0.9, 0.6, 0.4}, 2) == std::vector<int>{1, 0});
}

TEST_CASE("signal projection identity on binary vectors") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 40;
    const Pairing p = random_pairing(n, derive_seed(5, "pairing", trial));
    std::vector<int> z(n, 0);
    for (std::size_t i = 0; i < n / 2; ++i) z[i] = 1;
    rng.shuffle(std::span<int>(z));
    std::vector<double> u(n);
    for (auto& v : u) v = rng.bernoulli(0.5);
    const auto sp = signal_projection(p.to_pair_order(u), z, p);
    CHECK(l1_to_truth(u, z) == static_cast<double>(n / 2) - std::abs(sp.projection));
  }
}

TEST_CASE("signal projection at the truth and at one half") {
  const Pairing p = random_pairing(10, 1);
  const std::vector<int> z = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  std::vector<double> u(z.begin(), z.end());
  CHECK(std::abs(signal_projection(p.to_pair_order(u), z, p).projection) == 5.0);
  const auto half = signal_projection(std::vector<double>(10, 0.5), z, p);
  CHECK(half.projection == 0.0);
  CHECK(half.drift == 0.0);
}

TEST_CASE("exact recovery is permutation invariant") {
  CHECK(exact_recovery(std::vector<int>{0, 0, 1, 2}, std::vector<int>{2, 2, 0, 1}, 3));
  CHECK_FALSE(exact_recovery(std::vector<int>{0, 0, 1, 2}, std::vector<int>{2, 0, 0, 1}, 3));
}
