#pragma once

#include <vector>

#include "sbmvi/pairing.hpp"
#include "sbmvi/vips.hpp"

namespace sbmvi {

/// Evidence lower bound of the pairwise family for the two-class model with
/// B11 = B22 = p, B12 = q and prior Bernoulli(pi): the expected
/// log-likelihood over zz, yy, off-pair zy and pair dyads minus the per-pair
/// KL to the prior. Marginals are taken from psi, so state.phi/xi are not read.
double elbo(const VipsState& state, const BlockViews& blocks, double p, double q,
            double pi = 0.5);

struct PsiGradient {
  std::vector<double> d10, d01, d11;
};

/// d(T1 + T2 + T3 + T4)/d psi_i^{cd}, with psi00 = 1 - psi01 - psi10 - psi11.
/// Pair i's derivative only involves the marginals of the other pairs.
PsiGradient reconstruction_gradient(const std::vector<double>& phi,
                                    const std::vector<double>& xi,
                                    const BlockViews& blocks, double p, double q);

/// Full dL/dpsi_i^{cd}: reconstruction part minus the KL derivative
/// log(psi^{cd}/psi^{00}) - (c + d) logit(pi). Requires psi strictly inside
/// the simplex.
PsiGradient elbo_grad_psi(const VipsState& state, const BlockViews& blocks, double p,
                          double q, double pi = 0.5);

}  // namespace sbmvi
