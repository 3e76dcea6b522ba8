#include "sbmvi/pairing.hpp"

#include <numeric>

#include <json.hpp>

#include "sbmvi/error.hpp"
#include "sbmvi/random.hpp"

namespace sbmvi {

Pairing::Pairing(std::vector<Index> p1, std::vector<Index> p2)
    : p1_(std::move(p1)), p2_(std::move(p2)) {
  require(p1_.size() == p2_.size(), ErrorCode::InvalidInput,
          "P1 and P2 must have the same size");
  const std::size_t n = 2 * p1_.size();
  constexpr Index kUnset = ~Index{0};
  inverse_.assign(n, PairSlot{Side::P1, kUnset});
  auto place = [&](Index node, Side side, std::size_t k) {
    require(node < n, ErrorCode::InvalidInput, "pairing node out of range");
    require(inverse_[node].pair == kUnset, ErrorCode::InvalidInput,
            "pairing node listed twice");
    inverse_[node] = PairSlot{side, static_cast<Index>(k)};
  };
  for (std::size_t k = 0; k < p1_.size(); ++k) {
    place(p1_[k], Side::P1, k);
    place(p2_[k], Side::P2, k);
  }
}

std::vector<double> Pairing::to_pair_order(std::span<const double> node_values) const {
  require(node_values.size() == n(), ErrorCode::InvalidInput, "vector length must be n");
  std::vector<double> out(n());
  const std::size_t mm = m();
  for (std::size_t k = 0; k < mm; ++k) {
    out[k] = node_values[p1_[k]];
    out[mm + k] = node_values[p2_[k]];
  }
  return out;
}

std::vector<double> Pairing::to_node_order(std::span<const double> pair_values) const {
  require(pair_values.size() == n(), ErrorCode::InvalidInput, "vector length must be n");
  std::vector<double> out(n());
  const std::size_t mm = m();
  for (std::size_t k = 0; k < mm; ++k) {
    out[p1_[k]] = pair_values[k];
    out[p2_[k]] = pair_values[mm + k];
  }
  return out;
}

std::string Pairing::to_json() const { return nlohmann::json{p1_, p2_}.dump(); }

Pairing Pairing::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    require(j.is_array() && j.size() == 2, ErrorCode::InvalidInput,
            "pairing JSON must be [p1, p2]");
    return Pairing(j[0].get<std::vector<Index>>(), j[1].get<std::vector<Index>>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidInput, std::string("pairing JSON: ") + e.what());
  }
}

Pairing random_pairing(std::size_t n, std::uint64_t seed) {
  require(n % 2 == 0 && n > 0, ErrorCode::InvalidInput,
          "pairing requires a positive even node count, got " + std::to_string(n));
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Index>(perm));
  const auto half = static_cast<std::ptrdiff_t>(n / 2);
  return Pairing(std::vector<Index>(perm.begin(), perm.begin() + half),
                 std::vector<Index>(perm.begin() + half, perm.end()));
}

IndexSets index_sets(const Pairing& pairing, std::span<const int> labels) {
  require(labels.size() == pairing.n(), ErrorCode::InvalidInput,
          "labels must have length n");
  for (int l : labels)
    require(l == 0 || l == 1, ErrorCode::InvalidInput,
            "index sets need binary labels");
  IndexSets s;
  for (std::size_t k = 0; k < pairing.m(); ++k) {
    const auto idx = static_cast<Index>(k);
    const bool z1 = labels[pairing.p1()[k]] == 1;
    const bool y1 = labels[pairing.p2()[k]] == 1;
    (z1 ? s.c1 : s.c2).push_back(idx);
    (y1 ? s.c1p : s.c2p).push_back(idx);
    if (z1 && y1) s.c11.push_back(idx);
    else if (z1) s.c12.push_back(idx);
    else if (y1) s.c21.push_back(idx);
    else s.c22.push_back(idx);
  }
  return s;
}

BlockViews block_views(const Graph& graph, const Pairing& pairing) {
  require(graph.n() == pairing.n(), ErrorCode::InvalidInput,
          "graph has " + std::to_string(graph.n()) + " nodes but pairing covers " +
              std::to_string(pairing.n()));
  const std::size_t m = pairing.m();
  std::vector<Entry> zz, zy, yy;
  for (std::size_t i = 0; i < graph.n(); ++i) {
    const PairSlot a = pairing.slot(static_cast<Index>(i));
    graph.adjacency().for_each_in_row(i, [&](Index j) {
      const PairSlot b = pairing.slot(j);
      if (a.side == Side::P1 && b.side == Side::P1) zz.emplace_back(a.pair, b.pair);
      else if (a.side == Side::P2 && b.side == Side::P2) yy.emplace_back(a.pair, b.pair);
      else if (a.side == Side::P1) zy.emplace_back(a.pair, b.pair);
    });
  }
  const Storage storage = graph.adjacency().storage();
  BlockViews v;
  v.a_zz = BinaryMatrix::from_entries(m, m, std::move(zz), storage);
  v.a_zy = BinaryMatrix::from_entries(m, m, std::move(zy), storage);
  v.a_yy = BinaryMatrix::from_entries(m, m, std::move(yy), storage);
  v.a_yz = v.a_zy.transposed();
  v.a_zy_diag.resize(m);
  for (std::size_t k = 0; k < m; ++k) v.a_zy_diag[k] = v.a_zy.at(k, k) ? 1.0 : 0.0;
  return v;
}

}  // namespace sbmvi
