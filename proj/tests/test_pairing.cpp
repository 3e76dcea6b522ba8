#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "sbmvi/error.hpp"
#include "sbmvi/pairing.hpp"
#include "sbmvi/random.hpp"
#include "sbmvi/sbm.hpp"

using namespace sbmvi;

TEST_CASE("random pairing is a bijection") {
  const Pairing p = random_pairing(1000, 42);
  CHECK(p.m() == 500);
  std::vector<int> seen(1000, 0);
  for (std::size_t k = 0; k < p.m(); ++k) {
    seen[p.p1()[k]]++;
    seen[p.p2()[k]]++;
    CHECK(p.slot(p.p1()[k]).side == Side::P1);
    CHECK(p.slot(p.p1()[k]).pair == k);
    CHECK(p.slot(p.p2()[k]).side == Side::P2);
    CHECK(p.slot(p.p2()[k]).pair == k);
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  CHECK(random_pairing(1000, 42) == p);
  CHECK_FALSE(random_pairing(1000, 43) == p);
  CHECK_THROWS_AS(random_pairing(9, 1), Error);
  const Pairing two = random_pairing(2, 5);
  CHECK(two.p1()[0] + two.p2()[0] == 1);
}

TEST_CASE("pair and node order conversions invert each other") {
  const Pairing p = random_pairing(20, 3);
  std::vector<double> v(20);
  std::iota(v.begin(), v.end(), 0.0);
  CHECK(p.to_node_order(p.to_pair_order(v)) == v);
  const auto pair = p.to_pair_order(v);
  for (std::size_t k = 0; k < p.m(); ++k) {
    CHECK(pair[k] == p.p1()[k]);
    CHECK(pair[p.m() + k] == p.p2()[k]);
  }
  CHECK(Pairing::from_json(p.to_json()) == p);
}

TEST_CASE("index sets of a ten-node example") {
  // z-side nodes 0..4, y-side nodes 5..9.
  const Pairing p({0, 1, 2, 3, 4}, {5, 6, 7, 8, 9});
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1, 1, 0, 1, 0};
  const auto s = index_sets(p, labels);
  CHECK(s.c1 == std::vector<Index>{3, 4});
  CHECK(s.c2 == std::vector<Index>{0, 1, 2});
  CHECK(s.c1p == std::vector<Index>{0, 1, 3});
  CHECK(s.c2p == std::vector<Index>{2, 4});
  CHECK(s.c11 == std::vector<Index>{3});
  CHECK(s.c12 == std::vector<Index>{4});
  CHECK(s.c21 == std::vector<Index>{0, 1});
  CHECK(s.c22 == std::vector<Index>{2});
}

TEST_CASE("index sets partition the pairs") {
  Rng rng(1);
  std::vector<int> labels(1000);
  for (auto& l : labels) l = rng.bernoulli(0.5);
  const Pairing p = random_pairing(1000, 2);
  const auto s = index_sets(p, labels);
  CHECK(s.c11.size() + s.c12.size() + s.c21.size() + s.c22.size() == 500);
  CHECK(s.c1.size() + s.c2.size() == 500);
  CHECK(s.c1p.size() + s.c2p.size() == 500);
  const auto all = index_sets(p, std::vector<int>(1000, 1));
  CHECK(all.c1.size() == 500);
  CHECK(all.c2.empty());
  labels[0] = 2;
  CHECK_THROWS_AS(index_sets(p, labels), Error);
}

TEST_CASE("block views of a 4-node path") {
  const std::vector<Entry> edges = {{0, 1}, {1, 2}, {2, 3}};
  const Graph g = Graph::from_edges(4, 2, {0, 0, 1, 1}, edges);
  const auto b = block_views(g, Pairing({0, 1}, {2, 3}));
  CHECK_FALSE(b.a_zz.at(0, 0));
  CHECK(b.a_zz.at(0, 1));
  CHECK(b.a_zz.at(1, 0));
  CHECK_FALSE(b.a_zy.at(0, 0));
  CHECK_FALSE(b.a_zy.at(0, 1));
  CHECK(b.a_zy.at(1, 0));
  CHECK_FALSE(b.a_zy.at(1, 1));
  CHECK(b.a_zy_diag == std::vector<double>{0, 0});

  const Graph k4 = Graph::from_edges(4, 2, {0, 0, 1, 1},
                                     std::vector<Entry>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(block_views(k4, Pairing({0, 1}, {2, 3})).a_zy_diag == std::vector<double>{1, 1});
  CHECK(block_views(Graph::from_edges(4, 2, {0, 0, 1, 1}, {}), Pairing({0, 1}, {2, 3})).a_zz.nnz() == 0);
  CHECK_THROWS_AS(block_views(g, random_pairing(6, 1)), Error);
}

TEST_CASE("block views reassemble the adjacency") {
  for (int trial = 0; trial < 100; ++trial) {
    auto cfg = SbmConfig::two_class(24, 0.4, 0.2);
    cfg.backend = trial % 2 ? Backend::Sparse : Backend::Dense;
    const Graph g = generate_sbm(cfg, derive_seed(77, "graph", trial));
    const Pairing p = random_pairing(24, derive_seed(77, "pairing", trial));
    const auto b = block_views(g, p);
    for (std::size_t i = 0; i < p.m(); ++i) {
      CHECK(b.a_zy_diag[i] == g.has_edge(p.p1()[i], p.p2()[i]));
      for (std::size_t j = 0; j < p.m(); ++j) {
        REQUIRE(b.a_zz.at(i, j) == g.has_edge(p.p1()[i], p.p1()[j]));
        REQUIRE(b.a_yy.at(i, j) == g.has_edge(p.p2()[i], p.p2()[j]));
        REQUIRE(b.a_zy.at(i, j) == g.has_edge(p.p1()[i], p.p2()[j]));
        REQUIRE(b.a_yz.at(j, i) == b.a_zy.at(i, j));
      }
    }
  }
}
