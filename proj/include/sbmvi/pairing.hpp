#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbmvi/binary_matrix.hpp"
#include "sbmvi/sbm.hpp"

namespace sbmvi {

enum class Side : std::uint8_t { P1 = 0, P2 = 1 };

struct PairSlot {
  Side side;
  Index pair;
};

// Random split of the nodes into P1 and P2 with pair k linking p1[k] and
// p2[k]. Pair order is the order of p1.
class Pairing {
 public:
  Pairing() = default;
  Pairing(std::vector<Index> p1, std::vector<Index> p2);

  std::size_t m() const noexcept { return p1_.size(); }
  std::size_t n() const noexcept { return 2 * p1_.size(); }
  const std::vector<Index>& p1() const noexcept { return p1_; }
  const std::vector<Index>& p2() const noexcept { return p2_; }
  PairSlot slot(Index node) const { return inverse_.at(node); }

  /// Node vector (length n) -> concatenated pairing order (P1 block, P2 block).
  std::vector<double> to_pair_order(std::span<const double> node_values) const;
  /// Inverse of to_pair_order.
  std::vector<double> to_node_order(std::span<const double> pair_values) const;

  std::string to_json() const;
  static Pairing from_json(const std::string& text);

  friend bool operator==(const Pairing& a, const Pairing& b) {
    return a.p1_ == b.p1_ && a.p2_ == b.p2_;
  }

 private:
  std::vector<Index> p1_;
  std::vector<Index> p2_;
  std::vector<PairSlot> inverse_;
};

Pairing random_pairing(std::size_t n, std::uint64_t seed);

struct IndexSets {
  std::vector<Index> c1, c2, c1p, c2p;
  std::vector<Index> c11, c12, c21, c22;
};

/// c1 = {k : label(p1[k]) == 1}, c2 = {k : label(p1[k]) == 0}; the primed
/// sets use p2. Label 1 is community G1, label 0 is community G2.
IndexSets index_sets(const Pairing& pairing, std::span<const int> labels);

// Permuted blocks of A. a_yz is the materialized transpose of a_zy.
// a_zy_diag[k] = A(p1[k], p2[k]).
struct BlockViews {
  BinaryMatrix a_zz, a_zy, a_yz, a_yy;
  std::vector<double> a_zy_diag;

  std::size_t m() const noexcept { return a_zy_diag.size(); }
};

BlockViews block_views(const Graph& graph, const Pairing& pairing);

}  // namespace sbmvi
