#include "sbmvi/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "sbmvi/error.hpp"
#include "sbmvi/random.hpp"

namespace sbmvi {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double logistic(double x) {
  x = std::clamp(x, -kLogitClamp, kLogitClamp);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_row(double* row, std::size_t k) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a) {
    row[a] = std::clamp(row[a], -kLogitClamp, kLogitClamp);
    top = std::max(top, row[a]);
  }
  double z = 0.0;
  for (std::size_t a = 0; a < k; ++a) z += (row[a] = std::exp(row[a] - top));
  for (std::size_t a = 0; a < k; ++a) row[a] /= z;
}

std::vector<double> uniform_pi(int k) {
  return std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
}

}  // namespace

// ---- MFVI ------------------------------------------------------------------

void MfviConfig::validate() const {
  require(k >= 2, ErrorCode::InvalidConfig, "K must be at least 2");
  require(p_hat > 0.0 && p_hat < 1.0 && q_hat > 0.0 && q_hat < 1.0,
          ErrorCode::InvalidConfig, "p_hat and q_hat must lie in (0,1)");
  require(tol > 0.0 && max_iters >= 1, ErrorCode::InvalidConfig,
          "tol must be positive and max_iters >= 1");
  require(param_update_start >= 1, ErrorCode::InvalidConfig, "param_update_start must be >= 1");
  if (!pi.empty()) {
    require(pi.size() == static_cast<std::size_t>(k), ErrorCode::InvalidConfig,
            "pi must have length K");
    for (double v : pi)
      require(v > 0.0 && v < 1.0, ErrorCode::InvalidConfig, "pi entries must lie in (0,1)");
  }
}

std::vector<double> MfviConfig::class_probabilities() const {
  return pi.empty() ? uniform_pi(k) : pi;
}

std::vector<double> mfvi_sweep(const Graph& graph, std::span<const double> u,
                               const LogitConstants& consts, double pi) {
  const std::size_t n = graph.n();
  require(u.size() == n, ErrorCode::InvalidInput, "mfvi_sweep: u must have length n");
  require(pi > 0.0 && pi < 1.0, ErrorCode::InvalidConfig, "pi must lie in (0,1)");
  std::vector<double> c(n), ac(n), out(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (c[i] = u[i] - 0.5);
  graph.adjacency().multiply(c, ac);
  const double prior = std::log(pi / (1.0 - pi));
  for (std::size_t i = 0; i < n; ++i) {
    const double field = ac[i] - consts.lambda * (total - c[i]);
    out[i] = logistic(4.0 * consts.t * field + prior);
  }
  return out;
}

std::vector<double> mfvi_sweep_general(const Graph& graph, std::span<const double> u, int k,
                                       const LogitConstants& consts,
                                       std::span<const double> pi) {
  const std::size_t n = graph.n();
  const auto kk = static_cast<std::size_t>(k);
  require(u.size() == n * kk && pi.size() == kk, ErrorCode::InvalidInput,
          "mfvi_sweep_general: u must be n x K and pi length K");
  std::vector<double> out(n * kk), col(n), acol(n);
  for (std::size_t a = 0; a < kk; ++a) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += (col[i] = u[i * kk + a]);
    graph.adjacency().multiply(col, acol);
    const double prior = std::log(pi[a]);
    for (std::size_t i = 0; i < n; ++i)
      out[i * kk + a] = 2.0 * consts.t * (acol[i] - consts.lambda * (total - col[i])) + prior;
  }
  for (std::size_t i = 0; i < n; ++i) softmax_row(out.data() + i * kk, kk);
  return out;
}

ParameterEstimate mfvi_parameters(const Graph& graph, std::span<const double> u, int k) {
  const std::size_t n = graph.n();
  const auto kk = static_cast<std::size_t>(k);
  // Work with the n x K matrix; K = 2 vectors are expanded.
  std::vector<double> mat;
  if (k == 2 && u.size() == n) {
    mat.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      mat[2 * i] = 1.0 - u[i];
      mat[2 * i + 1] = u[i];
    }
  } else {
    require(u.size() == n * kk, ErrorCode::InvalidInput, "mfvi_parameters: u must be n x K");
    mat.assign(u.begin(), u.end());
  }
  double same_edges = 0.0, all_edges = 0.0;
  std::vector<double> col(n), acol(n), colsum(kk, 0.0), colsq(kk, 0.0);
  for (std::size_t a = 0; a < kk; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = mat[i * kk + a];
      colsum[a] += col[i];
      colsq[a] += col[i] * col[i];
    }
    graph.adjacency().multiply(col, acol);
    for (std::size_t i = 0; i < n; ++i) same_edges += col[i] * acol[i];
  }
  all_edges = static_cast<double>(graph.adjacency().nnz());
  double same_dyads = 0.0;
  for (std::size_t a = 0; a < kk; ++a) same_dyads += colsum[a] * colsum[a] - colsq[a];
  const double nn = static_cast<double>(n);
  const double all_dyads = nn * (nn - 1.0);
  // Ordered sums; every quantity counts each dyad twice.
  const double p_den = same_dyads;
  const double q_den = all_dyads - same_dyads;
  require(p_den > 0.0 && q_den > 0.0, ErrorCode::Estimation,
          "mean-field parameter update has a non-positive denominator");
  return {clamp_probability(same_edges / p_den),
          clamp_probability((all_edges - same_edges) / q_den)};
}

MfviRun run_mfvi(const Graph& graph, const MfviConfig& config, std::uint64_t seed) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = graph.n();
  const int k = config.k;
  const auto kk = static_cast<std::size_t>(k);
  const auto pi = config.class_probabilities();
  const bool binary = k == 2;

  MfviRun run;
  run.record.algorithm = "mfvi";
  run.record.seed = seed;
  run.p_hat = clamp_probability(config.p_hat);
  run.q_hat = clamp_probability(config.q_hat);
  LogitConstants consts = logit_constants_or_limit(run.p_hat, run.q_hat);

  if (binary) {
    run.u = config.init.draw(n, seed);
  } else {
    run.u = config.general_init.draw(n, k, seed);
  }

  const bool scorable = graph.k() <= k && k <= 6;
  auto record = [&](int it_index, bool with_params) {
    IterationMetrics it;
    it.iteration = it_index;
    if (binary) {
      it.l1 = l1_to_truth(run.u, graph.labels());
      it.nmi = nmi(hard_labels(run.u), graph.labels());
    } else {
      if (scorable) it.l1 = l1_to_truth_general(run.u, graph.labels(), k);
      it.nmi = nmi(hard_labels_general(run.u, k), graph.labels());
    }
    if (with_params) {
      it.p_hat = run.p_hat;
      it.q_hat = run.q_hat;
    }
    run.record.iterations.push_back(it);
  };
  record(0, false);

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    std::vector<double> next = binary ? mfvi_sweep(graph, run.u, consts, pi[1])
                                      : mfvi_sweep_general(graph, run.u, k, consts, pi);
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) change += std::abs(next[i] - run.u[i]);
    change /= binary ? static_cast<double>(n) : 2.0 * static_cast<double>(n);
    run.u = std::move(next);
    run.iterations = iter;
    if (config.update_params && iter >= config.param_update_start) {
      const auto est = mfvi_parameters(graph, run.u, k);
      run.p_hat = est.p_hat;
      run.q_hat = est.q_hat;
      consts = logit_constants_or_limit(run.p_hat, run.q_hat);
    }
    record(iter, true);
    if (change < config.tol) {
      run.record.converged = true;
      if (!config.run_to_max) break;
    }
  }
  run.labels = binary ? hard_labels(run.u) : hard_labels_general(run.u, k);
  (void)kk;
  run.record.wall_seconds = seconds_since(start);
  return run;
}

// ---- Spectral ----------------------------------------------------------------

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void orthogonalize(std::span<double> v, const std::vector<std::vector<double>>& basis) {
  for (const auto& b : basis) {
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) d += v[i] * b[i];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * b[i];
  }
}

}  // namespace

std::vector<int> kmeans(std::span<const double> points, std::size_t dim, int k, int restarts,
                        std::uint64_t seed) {
  require(dim > 0 && points.size() % dim == 0, ErrorCode::InvalidInput,
          "kmeans: points must be n x dim");
  const std::size_t n = points.size() / dim;
  const auto kk = static_cast<std::size_t>(k);
  require(k >= 1 && n >= kk, ErrorCode::InvalidInput, "kmeans: need at least K points");
  auto dist2 = [&](std::size_t i, const double* c) {
    double s = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = points[i * dim + d] - c[d];
      s += diff * diff;
    }
    return s;
  };
  Rng rng(seed);
  std::vector<int> best_labels(n, 0);
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> centers(kk * dim), nearest(n);
  std::vector<int> labels(n);
  for (int r = 0; r < std::max(1, restarts); ++r) {
    // k-means++ seeding.
    const auto first = static_cast<std::size_t>(rng.below(n));
    std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(first * dim), dim, centers.begin());
    for (std::size_t i = 0; i < n; ++i) nearest[i] = dist2(i, centers.data());
    for (std::size_t c = 1; c < kk; ++c) {
      double total = std::accumulate(nearest.begin(), nearest.end(), 0.0);
      std::size_t pick = static_cast<std::size_t>(rng.below(n));
      if (total > 0.0) {
        double target = rng.uniform() * total;
        for (std::size_t i = 0; i < n; ++i) {
          target -= nearest[i];
          if (target <= 0.0) {
            pick = i;
            break;
          }
        }
      }
      std::copy_n(points.begin() + static_cast<std::ptrdiff_t>(pick * dim), dim,
                  centers.begin() + static_cast<std::ptrdiff_t>(c * dim));
      for (std::size_t i = 0; i < n; ++i)
        nearest[i] = std::min(nearest[i], dist2(i, centers.data() + c * dim));
    }
    double cost = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      bool changed = iter == 0;
      cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int arg = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < kk; ++c) {
          const double d = dist2(i, centers.data() + c * dim);
          if (d < bd) {
            bd = d;
            arg = static_cast<int>(c);
          }
        }
        if (labels[i] != arg) changed = true;
        labels[i] = arg;
        cost += bd;
      }
      if (!changed) break;
      std::vector<double> sums(kk * dim, 0.0);
      std::vector<double> counts(kk, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        counts[c] += 1.0;
        for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += points[i * dim + d];
      }
      for (std::size_t c = 0; c < kk; ++c)
        if (counts[c] > 0.0)
          for (std::size_t d = 0; d < dim; ++d) centers[c * dim + d] = sums[c * dim + d] / counts[c];
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_labels = labels;
    }
  }
  return best_labels;
}

SpectralResult spectral_cluster_operator(const LinearOperator& op, std::size_t n, int k,
                                         double shift, std::uint64_t seed,
                                         const SpectralOptions& options) {
  require(k >= 2 && n >= static_cast<std::size_t>(k), ErrorCode::InvalidInput,
          "spectral clustering needs K >= 2 and n >= K");
  const auto kk = static_cast<std::size_t>(k);
  Rng rng(seed);
  SpectralResult result;
  std::vector<std::vector<double>> basis;
  std::vector<double> v(n), w(n);
  for (std::size_t j = 0; j < kk; ++j) {
    // The leading vector starts from the all-ones direction so that a
    // degenerate top eigenspace resolves to its Perron vector.
    for (std::size_t i = 0; i < n; ++i) v[i] = j == 0 ? 1.0 : rng.normal();
    orthogonalize(v, basis);
    double nv = norm2(v);
    if (nv == 0.0) {
      for (std::size_t i = 0; i < n; ++i) v[i] = rng.normal();
      orthogonalize(v, basis);
      nv = norm2(v);
    }
    for (auto& x : v) x /= nv;
    double rq = 0.0;
    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iters; ++iter) {
      op(v, w);
      for (std::size_t i = 0; i < n; ++i) w[i] += shift * v[i];
      double next_rq = 0.0;
      for (std::size_t i = 0; i < n; ++i) next_rq += v[i] * w[i];
      orthogonalize(w, basis);
      const double nw = norm2(w);
      if (nw == 0.0) {
        converged = true;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
      if (iter > 0 && std::abs(next_rq - rq) <= options.tol * std::max(1.0, std::abs(next_rq))) {
        rq = next_rq;
        converged = true;
        break;
      }
      rq = next_rq;
    }
    result.iterations += iter;
    result.converged = result.converged && converged;
    result.eigenvalues.push_back(rq - shift);
    basis.push_back(v);
  }
  result.eigenvectors.assign(n * kk, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < kk; ++j) result.eigenvectors[i * kk + j] = basis[j][i];
  if (k == 2) {
    result.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.labels[i] = basis[1][i] < 0.0 ? 0 : 1;
  } else {
    result.labels = kmeans(result.eigenvectors, kk, k, options.kmeans_restarts,
                           derive_seed(seed, "kmeans", 0));
  }
  return result;
}

SpectralResult spectral_cluster(const Graph& graph, int k, std::uint64_t seed,
                                const SpectralOptions& options) {
  const BinaryMatrix adj = graph.adjacency().with_storage(Storage::Sparse);
  double max_degree = 0.0;
  for (std::size_t i = 0; i < graph.n(); ++i)
    max_degree = std::max(max_degree, static_cast<double>(adj.row_nnz(i)));
  LinearOperator op = [&adj](std::span<const double> x, std::span<double> y) {
    adj.multiply(x, y);
  };
  return spectral_cluster_operator(op, graph.n(), k, max_degree, seed, options);
}

// ---- Belief propagation -----------------------------------------------------

BpRun run_bp(const Graph& graph, double p, double q, std::span<const double> pi, int k,
             const BpConfig& config, std::uint64_t seed) {
  const auto kk = static_cast<std::size_t>(k);
  std::vector<double> b(kk * kk, clamp_probability(q));
  for (std::size_t a = 0; a < kk; ++a) b[a * kk + a] = clamp_probability(p);
  return run_bp(graph, b, pi, k, config, seed);
}

BpRun run_bp(const Graph& graph, std::span<const double> b, std::span<const double> pi, int k,
             const BpConfig& config, std::uint64_t seed) {
  require(k >= 2, ErrorCode::InvalidConfig, "K must be at least 2");
  const auto kk = static_cast<std::size_t>(k);
  require(b.size() == kk * kk && pi.size() == kk, ErrorCode::InvalidInput,
          "BP needs a K x K matrix and a length-K prior");
  for (double v : b)
    require(v > 0.0 && v < 1.0, ErrorCode::InvalidInput, "BP parameters must lie in (0,1)");
  require(config.damping >= 0.0 && config.damping < 1.0, ErrorCode::InvalidConfig,
          "damping must lie in [0,1)");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = graph.n();

  // Directed edge layout follows the CSR rows of the adjacency.
  std::vector<std::size_t> offset(n + 1, 0);
  std::vector<Index> target;
  for (std::size_t i = 0; i < n; ++i) {
    graph.adjacency().for_each_in_row(i, [&](Index j) { target.push_back(j); });
    offset[i + 1] = target.size();
  }
  const std::size_t edges = target.size();
  std::vector<std::size_t> reverse(edges);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = offset[i]; e < offset[i + 1]; ++e) {
      const Index j = target[e];
      const auto first = target.begin() + static_cast<std::ptrdiff_t>(offset[j]);
      const auto last = target.begin() + static_cast<std::ptrdiff_t>(offset[j + 1]);
      reverse[e] = static_cast<std::size_t>(std::lower_bound(first, last, static_cast<Index>(i)) -
                                            target.begin());
    }

  Rng rng(seed);
  std::vector<double> msg(edges * kk), belief(n * kk);
  auto noisy_prior = [&](double* out) {
    double z = 0.0;
    for (std::size_t a = 0; a < kk; ++a)
      z += (out[a] = pi[a] * (1.0 + config.init_noise * (2.0 * rng.uniform() - 1.0)));
    for (std::size_t a = 0; a < kk; ++a) out[a] /= z;
  };
  for (std::size_t e = 0; e < edges; ++e) noisy_prior(msg.data() + e * kk);
  for (std::size_t i = 0; i < n; ++i) noisy_prior(belief.data() + i * kk);

  std::vector<double> log_b(kk * kk);
  for (std::size_t x = 0; x < kk * kk; ++x) log_b[x] = std::log(b[x]);

  // Non-edge log factor of node j on label a: log(1 - sum_c B_ac belief_j(c)).
  auto non_edge = [&](std::size_t j, std::size_t a) {
    double s = 0.0;
    for (std::size_t c = 0; c < kk; ++c) s += b[a * kk + c] * belief[j * kk + c];
    return std::log(std::max(1.0 - s, 1e-300));
  };
  std::vector<double> field(kk, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t a = 0; a < kk; ++a) field[a] += non_edge(j, a);

  auto record_metrics = [&](int iter, BpRun& run) {
    IterationMetrics it;
    it.iteration = iter;
    const auto labels = hard_labels_general(belief, k);
    if (graph.k() <= k && k <= 6) it.l1 = l1_to_truth_general(belief, graph.labels(), k);
    it.nmi = nmi(labels, graph.labels());
    run.record.iterations.push_back(it);
  };

  BpRun run;
  run.record.algorithm = "bp";
  run.record.seed = seed;
  record_metrics(0, run);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> total(kk), incoming, fresh(kk);
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    rng.shuffle(std::span<std::size_t>(order));
    double residual = 0.0;
    for (std::size_t i : order) {
      const std::size_t deg = offset[i + 1] - offset[i];
      incoming.assign(deg * kk, 0.0);
      for (std::size_t a = 0; a < kk; ++a) {
        double h = field[a] - non_edge(i, a);
        for (std::size_t e = offset[i]; e < offset[i + 1]; ++e) h -= non_edge(target[e], a);
        total[a] = std::log(pi[a]) + h;
      }
      // Incoming edge factors log(sum_c B_ac m_{j->i}(c)).
      for (std::size_t t = 0; t < deg; ++t) {
        const std::size_t back = reverse[offset[i] + t];
        for (std::size_t a = 0; a < kk; ++a) {
          double s = 0.0;
          for (std::size_t c = 0; c < kk; ++c) s += b[a * kk + c] * msg[back * kk + c];
          incoming[t * kk + a] = std::log(std::max(s, 1e-300));
          total[a] += incoming[t * kk + a];
        }
      }
      // Outgoing messages exclude the recipient's own contribution.
      for (std::size_t t = 0; t < deg; ++t) {
        const std::size_t e = offset[i] + t;
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < kk; ++a) {
          fresh[a] = total[a] - incoming[t * kk + a];
          top = std::max(top, fresh[a]);
        }
        double z = 0.0;
        for (std::size_t a = 0; a < kk; ++a) z += (fresh[a] = std::exp(fresh[a] - top));
        for (std::size_t a = 0; a < kk; ++a) {
          const double next =
              config.damping * msg[e * kk + a] + (1.0 - config.damping) * fresh[a] / z;
          residual = std::max(residual, std::abs(next - msg[e * kk + a]));
          msg[e * kk + a] = next;
        }
      }
      // Belief update, keeping the global non-edge field in sync.
      for (std::size_t a = 0; a < kk; ++a) field[a] -= non_edge(i, a);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < kk; ++a) top = std::max(top, total[a]);
      double z = 0.0;
      for (std::size_t a = 0; a < kk; ++a) z += (fresh[a] = std::exp(total[a] - top));
      for (std::size_t a = 0; a < kk; ++a) belief[i * kk + a] = fresh[a] / z;
      for (std::size_t a = 0; a < kk; ++a) field[a] += non_edge(i, a);
    }
    run.iterations = iter;
    record_metrics(iter, run);
    if (residual < config.tol) {
      run.converged = true;
      break;
    }
  }
  run.record.converged = run.converged;
  if (!run.converged)
    run.record.warnings.push_back("BP did not converge within max_iters");
  run.beliefs = std::move(belief);
  run.labels = hard_labels_general(run.beliefs, k);
  run.record.wall_seconds = seconds_since(start);
  return run;
}

}  // namespace sbmvi
