#include "sbmvi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sbmvi/error.hpp"
#include "sbmvi/pairing.hpp"

namespace sbmvi {

double l1_to_truth(std::span<const double> u, std::span<const int> z) {
  require(u.size() == z.size(), ErrorCode::InvalidInput, "l1_to_truth: length mismatch");
  double direct = 0.0, flipped = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double zi = z[i] == 1 ? 1.0 : 0.0;
    direct += std::abs(u[i] - zi);
    flipped += std::abs(u[i] - (1.0 - zi));
  }
  return std::min(direct, flipped);
}

double l1_to_truth_general(std::span<const double> u, std::span<const int> z, int k) {
  require(k >= 2 && k <= 6, ErrorCode::InvalidInput, "l1_to_truth_general: K must be in [2, 6]");
  const auto kk = static_cast<std::size_t>(k);
  require(u.size() == z.size() * kk, ErrorCode::InvalidInput,
          "l1_to_truth_general: u must be n x K");
  // mass[c][a] = sum over nodes with truth c of u[i, a]
  std::vector<double> mass(kk * kk, 0.0);
  std::vector<double> count(kk, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto c = static_cast<std::size_t>(z[i]);
    require(c < kk, ErrorCode::InvalidInput, "label out of range");
    count[c] += 1.0;
    for (std::size_t a = 0; a < kk; ++a) mass[c * kk + a] += u[i * kk + a];
  }
  std::vector<std::size_t> sigma(kk);
  std::iota(sigma.begin(), sigma.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t c = 0; c < kk; ++c) total += count[c] - mass[c * kk + sigma[c]];
    best = std::min(best, total);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

double nmi(std::span<const int> a, std::span<const int> b) {
  require(!a.empty(), ErrorCode::InvalidInput, "nmi: empty input");
  require(a.size() == b.size(), ErrorCode::InvalidInput, "nmi: length mismatch");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  auto entropy = [n](const std::map<int, double>& c) {
    double h = 0.0;
    for (const auto& [_, v] : c) h -= (v / n) * std::log(v / n);
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (ca.size() == 1 || cb.size() == 1) {
    return (ca.size() == 1 && cb.size() == 1) ? 1.0 : 0.0;
  }
  double mi = 0.0;
  for (const auto& [key, v] : joint) {
    const double pxy = v / n;
    mi += pxy * std::log(pxy * n * n / (ca[key.first] * cb[key.second]));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

std::vector<int> hard_labels(std::span<const double> u) {
  std::vector<int> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] >= 0.5 ? 1 : 0;
  return out;
}

std::vector<int> hard_labels_general(std::span<const double> u, int k) {
  const auto kk = static_cast<std::size_t>(k);
  require(k >= 1 && u.size() % kk == 0, ErrorCode::InvalidInput,
          "hard_labels_general: u must be n x K");
  std::vector<int> out(u.size() / kk);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* row = u.data() + i * kk;
    out[i] = static_cast<int>(std::max_element(row, row + kk) - row);
  }
  return out;
}

SignalProjection signal_projection(std::span<const double> u, std::span<const int> z,
                                   const Pairing& pairing) {
  const std::size_t m = pairing.m();
  require(u.size() == 2 * m && z.size() == 2 * m, ErrorCode::InvalidInput,
          "signal_projection: length mismatch");
  SignalProjection s;
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double v1 = z[pairing.p1()[k]] == 1 ? 1.0 : -1.0;
    const double v2 = z[pairing.p2()[k]] == 1 ? 1.0 : -1.0;
    s.projection += u[k] * v1 + u[m + k] * v2;
    total += u[k] + u[m + k];
  }
  s.drift = total - static_cast<double>(m);
  return s;
}

bool exact_recovery(std::span<const int> labels, std::span<const int> z, int k) {
  require(labels.size() == z.size(), ErrorCode::InvalidInput, "exact_recovery: length mismatch");
  std::vector<int> map_to(static_cast<std::size_t>(k), -1);
  std::vector<int> map_from(static_cast<std::size_t>(k), -1);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto a = static_cast<std::size_t>(labels[i]);
    const auto c = static_cast<std::size_t>(z[i]);
    if (a >= map_to.size() || c >= map_from.size()) return false;
    if (map_to[a] == -1 && map_from[c] == -1) {
      map_to[a] = z[i];
      map_from[c] = labels[i];
    } else if (map_to[a] != z[i] || map_from[c] != labels[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace sbmvi
