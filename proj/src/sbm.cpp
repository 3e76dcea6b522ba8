#include "sbmvi/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sbmvi/error.hpp"
#include "sbmvi/random.hpp"

namespace sbmvi {

using nlohmann::json;

SbmConfig SbmConfig::two_class(std::size_t n, double p, double q, double pi,
                               AssignmentMode mode) {
  SbmConfig c;
  c.n = n;
  c.k = 2;
  c.pi = {1.0 - pi, pi};  // label 1 is G1 with probability pi
  c.b = {p, q, q, p};
  c.assignment = mode;
  return c;
}

SbmConfig SbmConfig::planted(std::size_t n, int k, double p, double q,
                             AssignmentMode mode) {
  require(k >= 2, ErrorCode::InvalidConfig, "K must be at least 2");
  SbmConfig c;
  c.n = n;
  c.k = k;
  c.pi.assign(static_cast<std::size_t>(k), 1.0 / k);
  c.b.assign(static_cast<std::size_t>(k * k), q);
  for (int a = 0; a < k; ++a) c.b[static_cast<std::size_t>(a * k + a)] = p;
  c.assignment = mode;
  return c;
}

void SbmConfig::validate() const {
  require(n > 0, ErrorCode::InvalidConfig, "n must be positive");
  require(k >= 2, ErrorCode::InvalidConfig, "K must be at least 2");
  const auto kk = static_cast<std::size_t>(k);
  require(pi.size() == kk, ErrorCode::InvalidConfig, "pi must have length K");
  require(b.size() == kk * kk, ErrorCode::InvalidConfig, "B must be K x K");
  double total = 0.0;
  for (double v : pi) {
    require(v > 0.0 && v < 1.0, ErrorCode::InvalidConfig, "pi entries must lie in (0,1)");
    total += v;
  }
  require(std::abs(total - 1.0) < 1e-9, ErrorCode::InvalidConfig, "pi must sum to 1");
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < k; ++c) {
      const double v = block(a, c);
      require(v > 0.0 && v < 1.0, ErrorCode::InvalidConfig,
              "B entries must lie strictly inside (0,1)");
      require(v == block(c, a), ErrorCode::InvalidConfig, "B must be symmetric");
    }
  if (assignment == AssignmentMode::ExactBalanced) {
    require(n % kk == 0, ErrorCode::InvalidConfig,
            "exact-balanced assignment requires K to divide n (n=" +
                std::to_string(n) + ", K=" + std::to_string(k) + ")");
    for (double v : pi)
      require(std::abs(v - 1.0 / k) < 1e-12, ErrorCode::InvalidConfig,
              "exact-balanced assignment requires uniform pi; use multinomial");
  }
}

Storage resolve_backend(Backend backend, std::size_t n) noexcept {
  switch (backend) {
    case Backend::Dense: return Storage::Dense;
    case Backend::Sparse: return Storage::Sparse;
    case Backend::Auto: break;
  }
  return n <= kDenseBackendLimit ? Storage::Dense : Storage::Sparse;
}

Graph::Graph(std::size_t n, int k, std::vector<int> labels, BinaryMatrix adjacency,
             std::optional<SbmConfig> config)
    : n_(n), k_(k), labels_(std::move(labels)), adj_(std::move(adjacency)),
      config_(std::move(config)) {
  require(adj_.rows() == n_ && adj_.cols() == n_, ErrorCode::InvalidInput,
          "adjacency must be n x n");
  require(labels_.size() == n_, ErrorCode::InvalidInput, "labels must have length n");
  for (int l : labels_)
    require(l >= 0 && l < k_, ErrorCode::InvalidInput, "label out of range");
}

Graph Graph::from_edges(std::size_t n, int k, std::vector<int> labels,
                        std::span<const Entry> edges, Backend backend) {
  std::vector<Entry> entries;
  entries.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    require(u < n && v < n, ErrorCode::InvalidInput, "edge endpoint out of range");
    require(u != v, ErrorCode::InvalidInput, "self-loops are not allowed");
    entries.emplace_back(u, v);
    entries.emplace_back(v, u);
  }
  auto adj = BinaryMatrix::from_entries(n, n, std::move(entries), resolve_backend(backend, n));
  return Graph(n, k, std::move(labels), std::move(adj));
}

std::vector<Entry> Graph::edges() const {
  std::vector<Entry> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < n_; ++i)
    adj_.for_each_in_row(i, [&](Index j) {
      if (i < j) out.emplace_back(static_cast<Index>(i), j);
    });
  return out;
}

double Graph::density() const noexcept {
  if (n_ < 2) return 0.0;
  return static_cast<double>(adj_.nnz()) /
         (static_cast<double>(n_) * static_cast<double>(n_ - 1));
}

Graph Graph::with_backend(Backend backend) const {
  Graph g = *this;
  g.adj_ = adj_.with_storage(resolve_backend(backend, n_));
  return g;
}

namespace {

// Visits the selected positions of a Bernoulli(p) sequence of length total
// by geometric skipping.
template <class F>
void bernoulli_positions(Rng& rng, std::uint64_t total, double p, F&& visit) {
  if (total == 0) return;
  const double log_q = std::log1p(-p);
  std::uint64_t pos = 0;
  bool first = true;
  for (;;) {
    const double skip = std::floor(std::log(rng.uniform_open0()) / log_q);
    const double next = static_cast<double>(pos) + skip + (first ? 0.0 : 1.0);
    first = false;
    if (next >= static_cast<double>(total)) return;
    pos = static_cast<std::uint64_t>(next);
    visit(pos);
  }
}

}  // namespace

Graph generate_sbm(const SbmConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t n = config.n;
  const auto k = static_cast<std::size_t>(config.k);

  std::vector<int> labels(n);
  if (config.assignment == AssignmentMode::ExactBalanced) {
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    rng.shuffle(std::span<Index>(perm));
    const std::size_t size = n / k;
    for (std::size_t r = 0; r < n; ++r) labels[perm[r]] = static_cast<int>(r / size);
  } else {
    for (auto& l : labels) {
      const double u = rng.uniform();
      double acc = 0.0;
      l = config.k - 1;
      for (std::size_t a = 0; a < k; ++a) {
        acc += config.pi[a];
        if (u < acc) {
          l = static_cast<int>(a);
          break;
        }
      }
    }
  }

  std::vector<std::vector<Index>> members(k);
  for (std::size_t i = 0; i < n; ++i)
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));

  std::vector<Entry> entries;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t c = a; c < k; ++c) {
      const auto& ra = members[a];
      const auto& rc = members[c];
      const double p = config.block(static_cast<int>(a), static_cast<int>(c));
      if (a == c) {
        // Upper triangle of the within-block pairs, row-major.
        const std::uint64_t s = ra.size();
        std::uint64_t row = 0, row_start = 0;
        bernoulli_positions(rng, s * (s - (s > 0 ? 1 : 0)) / 2, p, [&](std::uint64_t pos) {
          while (pos - row_start >= s - 1 - row) {
            row_start += s - 1 - row;
            ++row;
          }
          const Index u = ra[row];
          const Index v = ra[row + 1 + (pos - row_start)];
          entries.emplace_back(u, v);
          entries.emplace_back(v, u);
        });
      } else {
        const std::uint64_t cols = rc.size();
        bernoulli_positions(rng, ra.size() * cols, p, [&](std::uint64_t pos) {
          const Index u = ra[pos / cols];
          const Index v = rc[pos % cols];
          entries.emplace_back(u, v);
          entries.emplace_back(v, u);
        });
      }
    }
  }
  auto adj = BinaryMatrix::from_entries(n, n, std::move(entries),
                                        resolve_backend(config.backend, n));
  return Graph(n, config.k, std::move(labels), std::move(adj), config);
}

double clamp_probability(double p) noexcept {
  return std::clamp(p, kProbabilityEps, 1.0 - kProbabilityEps);
}

LogitConstants logit_constants(double p, double q) {
  require(std::isfinite(p) && std::isfinite(q), ErrorCode::InvalidInput,
          "p and q must be finite");
  p = clamp_probability(p);
  q = clamp_probability(q);
  require(p != q, ErrorCode::DegenerateParameters,
          "p == q gives t = 0 and an undefined lambda");
  const double t = 0.5 * (std::log(p / (1.0 - p)) - std::log(q / (1.0 - q)));
  const double lambda = (std::log1p(-q) - std::log1p(-p)) / (2.0 * t);
  return {t, lambda};
}

LogitConstants logit_constants_or_limit(double p, double q) {
  if (clamp_probability(p) == clamp_probability(q)) return {0.0, clamp_probability(p)};
  return logit_constants(p, q);
}

namespace {

const char* to_string(AssignmentMode m) {
  return m == AssignmentMode::ExactBalanced ? "exact-balanced" : "multinomial";
}

json config_to_json(const SbmConfig& c) {
  return json{{"n", c.n},
              {"K", c.k},
              {"pi", c.pi},
              {"B", c.b},
              {"assignment_mode", to_string(c.assignment)}};
}

SbmConfig config_from_json(const json& j) {
  SbmConfig c;
  c.n = j.at("n").get<std::size_t>();
  c.k = j.at("K").get<int>();
  c.pi = j.at("pi").get<std::vector<double>>();
  c.b = j.at("B").get<std::vector<double>>();
  const auto mode = j.value("assignment_mode", std::string("exact-balanced"));
  c.assignment = mode == "multinomial" ? AssignmentMode::Multinomial
                                       : AssignmentMode::ExactBalanced;
  return c;
}

}  // namespace

void save_graph(const Graph& graph, const std::filesystem::path& edges_path,
                const std::filesystem::path& meta_path) {
  std::ofstream edges(edges_path);
  require(edges.good(), ErrorCode::Io, "cannot open " + edges_path.string());
  for (const auto& [u, v] : graph.edges()) edges << u << ' ' << v << '\n';
  require(edges.good(), ErrorCode::Io, "failed writing " + edges_path.string());

  json meta{{"n", graph.n()}, {"K", graph.k()}, {"labels", graph.labels()}};
  if (graph.config()) meta["config"] = config_to_json(*graph.config());
  std::ofstream out(meta_path);
  require(out.good(), ErrorCode::Io, "cannot open " + meta_path.string());
  out << meta.dump(2) << '\n';
}

Graph load_graph(const std::filesystem::path& edges_path,
                 const std::filesystem::path& meta_path, Backend backend) {
  std::ifstream meta_in(meta_path);
  require(meta_in.good(), ErrorCode::Io, "cannot open " + meta_path.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, meta_path.string() + ": " + e.what());
  }
  const auto n = meta.at("n").get<std::size_t>();
  const int k = meta.at("K").get<int>();
  auto labels = meta.at("labels").get<std::vector<int>>();

  std::ifstream in(edges_path);
  require(in.good(), ErrorCode::Io, "cannot open " + edges_path.string());
  std::vector<Entry> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    long long u = -1, v = -1;
    require(static_cast<bool>(ss >> u >> v) && u >= 0 && v >= 0, ErrorCode::Io,
            edges_path.string() + ":" + std::to_string(lineno) + ": expected `u v`");
    edges.emplace_back(static_cast<Index>(u), static_cast<Index>(v));
  }
  Graph g = Graph::from_edges(n, k, std::move(labels), edges, backend);
  if (meta.contains("config")) {
    return Graph(g.n(), g.k(), g.labels(), g.adjacency(), config_from_json(meta["config"]));
  }
  return g;
}

}  // namespace sbmvi
