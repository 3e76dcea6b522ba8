#pragma once

#include <span>
#include <vector>

#include "sbmvi/binary_matrix.hpp"

namespace sbmvi::detail {

// out = [A - lambda (J - I) - diag(d)] x, with d optional.
inline void shifted_product(const BinaryMatrix& a, std::span<const double> x, double lambda,
                            const std::vector<double>* diag, std::span<double> out) {
  a.multiply(x, out);
  double total = 0.0;
  for (double v : x) total += v;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] -= lambda * (total - x[i]);
    if (diag) out[i] -= (*diag)[i] * x[i];
  }
}

}  // namespace sbmvi::detail
