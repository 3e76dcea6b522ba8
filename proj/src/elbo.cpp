#include "sbmvi/elbo.hpp"

#include <cmath>

#include "sbmvi/error.hpp"

namespace sbmvi {

namespace {

struct EdgeLogs {
  double lp, l1p, lq, l1q;
  double dl() const { return lp - lq; }   // log-odds difference
  double dc() const { return l1p - l1q; } // non-edge difference
};

EdgeLogs edge_logs(double p, double q) {
  require(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0, ErrorCode::InvalidInput,
          "elbo: p and q must lie in (0,1)");
  return {std::log(p / (1.0 - p)), std::log1p(-p), std::log(q / (1.0 - q)), std::log1p(-q)};
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Expected log-likelihood of a within-side block (zz or yy), summed over
// unordered dyads.
double within_block_term(const BinaryMatrix& a, const std::vector<double>& v,
                         const EdgeLogs& L) {
  const std::size_t m = v.size();
  const double mm = static_cast<double>(m);
  std::vector<double> ones(m, 1.0), deg(m), av(m);
  a.multiply(ones, deg);
  a.multiply(v, av);
  const double total_a = sum(deg);
  const double same_a = total_a - 2.0 * dot(v, deg) + 2.0 * dot(v, av);
  const double sv = sum(v);
  const double same_all = mm * (mm - 1.0) - 2.0 * (mm - 1.0) * sv + 2.0 * (sv * sv - dot(v, v));
  return 0.5 * (total_a * L.lq + mm * (mm - 1.0) * L.l1q + same_a * L.dl() +
                same_all * L.dc());
}

}  // namespace

double elbo(const VipsState& s, const BlockViews& blocks, double p, double q, double pi) {
  require(pi > 0.0 && pi < 1.0, ErrorCode::InvalidInput, "elbo: pi must lie in (0,1)");
  require(s.m == blocks.m(), ErrorCode::InvalidInput, "elbo: dimension mismatch");
  const EdgeLogs L = edge_logs(p, q);
  const std::size_t m = s.m;
  const double mm = static_cast<double>(m);
  const auto& d = blocks.a_zy_diag;

  std::vector<double> phi(m), xi(m);
  for (std::size_t k = 0; k < m; ++k) {
    phi[k] = s.psi10[k] + s.psi11[k];
    xi[k] = s.psi01[k] + s.psi11[k];
  }

  const double t1 = within_block_term(blocks.a_zz, phi, L);
  const double t2 = within_block_term(blocks.a_yy, xi, L);

  // Off-pair zy dyads, ordered (i, j) with i != j.
  std::vector<double> ones(m, 1.0), rows(m), cols(m), axi(m);
  blocks.a_zy.multiply(ones, rows);
  blocks.a_yz.multiply(ones, cols);
  blocks.a_zy.multiply(xi, axi);
  double total_a = 0.0, phi_rows = 0.0, xi_cols = 0.0, phi_a_xi = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    total_a += rows[k] - d[k];
    phi_rows += phi[k] * (rows[k] - d[k]);
    xi_cols += xi[k] * (cols[k] - d[k]);
    phi_a_xi += phi[k] * (axi[k] - d[k] * xi[k]);
  }
  const double same_a = total_a - phi_rows - xi_cols + 2.0 * phi_a_xi;
  const double sphi = sum(phi), sxi = sum(xi);
  const double same_all = mm * (mm - 1.0) - (mm - 1.0) * (sphi + sxi) +
                          2.0 * (sphi * sxi - dot(phi, xi));
  const double t3 =
      total_a * L.lq + mm * (mm - 1.0) * L.l1q + same_a * L.dl() + same_all * L.dc();

  double t4 = 0.0, kl = 0.0;
  const double log_prior00 = 2.0 * std::log1p(-pi);
  const double log_prior01 = std::log(pi) + std::log1p(-pi);
  const double log_prior11 = 2.0 * std::log(pi);
  auto plogp = [](double v, double log_prior) {
    if (v <= 0.0) return 0.0;
    return v * (std::log(std::max(v, 1e-300)) - log_prior);
  };
  for (std::size_t k = 0; k < m; ++k) {
    const double disc = s.psi01[k] + s.psi10[k];
    t4 += (1.0 - disc) * (d[k] * L.lp + L.l1p) + disc * (d[k] * L.lq + L.l1q);
    const double psi00 = 1.0 - s.psi01[k] - s.psi10[k] - s.psi11[k];
    kl += plogp(psi00, log_prior00) + plogp(s.psi01[k], log_prior01) +
          plogp(s.psi10[k], log_prior01) + plogp(s.psi11[k], log_prior11);
  }
  return t1 + t2 + t3 + t4 - kl;
}

PsiGradient reconstruction_gradient(const std::vector<double>& phi,
                                    const std::vector<double>& xi,
                                    const BlockViews& blocks, double p, double q) {
  const std::size_t m = blocks.m();
  require(phi.size() == m && xi.size() == m, ErrorCode::InvalidInput,
          "reconstruction_gradient: dimension mismatch");
  const EdgeLogs L = edge_logs(p, q);
  const auto& d = blocks.a_zy_diag;

  std::vector<double> sphi(m), sxi(m);  // 2v - 1
  for (std::size_t k = 0; k < m; ++k) {
    sphi[k] = 2.0 * phi[k] - 1.0;
    sxi[k] = 2.0 * xi[k] - 1.0;
  }
  const double tot_phi = sum(sphi), tot_xi = sum(sxi);

  // sum_{j != i} s_j (A_ij dl + dc), with the pair dyad removed for zy/yz.
  auto term = [&](const BinaryMatrix& a, const std::vector<double>& sv, double tot,
                  bool off_pair) {
    std::vector<double> out(m);
    a.multiply(sv, out);
    for (std::size_t i = 0; i < m; ++i) {
      double as = out[i];
      if (off_pair) as -= d[i] * sv[i];
      out[i] = as * L.dl() + (tot - sv[i]) * L.dc();
    }
    return out;
  };
  const auto zz = term(blocks.a_zz, sphi, tot_phi, false);
  const auto zy = term(blocks.a_zy, sxi, tot_xi, true);
  const auto yy = term(blocks.a_yy, sxi, tot_xi, false);
  const auto yz = term(blocks.a_yz, sphi, tot_phi, true);

  PsiGradient g;
  g.d10.resize(m);
  g.d01.resize(m);
  g.d11.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double pair_term = -(d[i] * L.dl() + L.dc());
    g.d10[i] = zz[i] + zy[i] + pair_term;
    g.d01[i] = yy[i] + yz[i] + pair_term;
    g.d11[i] = zz[i] + yy[i] + zy[i] + yz[i];
  }
  return g;
}

PsiGradient elbo_grad_psi(const VipsState& s, const BlockViews& blocks, double p, double q,
                          double pi) {
  require(pi > 0.0 && pi < 1.0, ErrorCode::InvalidInput, "pi must lie in (0,1)");
  const std::size_t m = s.m;
  std::vector<double> phi(m), xi(m), psi00(m);
  for (std::size_t k = 0; k < m; ++k) {
    psi00[k] = 1.0 - s.psi01[k] - s.psi10[k] - s.psi11[k];
    for (double v : {psi00[k], s.psi01[k], s.psi10[k], s.psi11[k]})
      require(v > 0.0 && v < 1.0, ErrorCode::Domain,
              "elbo_grad_psi: psi on the simplex boundary at pair " + std::to_string(k));
    phi[k] = s.psi10[k] + s.psi11[k];
    xi[k] = s.psi01[k] + s.psi11[k];
  }
  PsiGradient g = reconstruction_gradient(phi, xi, blocks, p, q);
  const double lp = std::log(pi / (1.0 - pi));
  for (std::size_t k = 0; k < m; ++k) {
    const double base = std::log(psi00[k]);
    g.d10[k] -= std::log(s.psi10[k]) - base - lp;
    g.d01[k] -= std::log(s.psi01[k]) - base - lp;
    g.d11[k] -= std::log(s.psi11[k]) - base - 2.0 * lp;
  }
  return g;
}

}  // namespace sbmvi
