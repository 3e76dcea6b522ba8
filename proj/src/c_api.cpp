#include "sbmvi/sbmvi.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "sbmvi/baselines.hpp"
#include "sbmvi/error.hpp"
#include "sbmvi/harness.hpp"
#include "sbmvi/metrics.hpp"
#include "sbmvi/pairing.hpp"
#include "sbmvi/sbm.hpp"
#include "sbmvi/vips.hpp"
#include "sbmvi/vips_general.hpp"

struct sbmvi_graph {
  sbmvi::Graph graph;
};

struct sbmvi_pairing {
  sbmvi::Pairing pairing;
};

struct sbmvi_result {
  std::size_t n = 0;
  int columns = 1;
  std::vector<int> labels;
  std::vector<double> memberships;
  bool converged = false;
  double p_hat = sbmvi::kNaN;
  double q_hat = sbmvi::kNaN;
  std::vector<sbmvi::IterationMetrics> record;
};

struct sbmvi_experiment {
  sbmvi::ExperimentResult result;
  std::string csv;
};

namespace {

thread_local std::string last_error;

template <class F>
int guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return SBMVI_OK;
  } catch (const sbmvi::Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SBMVI_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SBMVI_ERR_INTERNAL;
  }
}

void need(const void* ptr, const char* name) {
  if (!ptr) throw sbmvi::Error(sbmvi::ErrorCode::InvalidInput, std::string(name) + " is NULL");
}

int null_argument(const char* name) {
  last_error = std::string(name) + " is NULL";
  return SBMVI_ERR_NULL_ARGUMENT;
}

sbmvi::Backend to_backend(int b) {
  switch (b) {
    case SBMVI_BACKEND_AUTO: return sbmvi::Backend::Auto;
    case SBMVI_BACKEND_DENSE: return sbmvi::Backend::Dense;
    case SBMVI_BACKEND_SPARSE: return sbmvi::Backend::Sparse;
    default: sbmvi::fail(sbmvi::ErrorCode::InvalidConfig, "unknown backend " + std::to_string(b));
  }
}

sbmvi::InitSpec to_init(int kind, double value, const double* values, std::size_t len) {
  switch (kind) {
    case SBMVI_INIT_BERNOULLI: return sbmvi::InitSpec::bernoulli(value);
    case SBMVI_INIT_CONSTANT: return sbmvi::InitSpec::constant(value);
    case SBMVI_INIT_UNIFORM: return sbmvi::InitSpec::uniform();
    case SBMVI_INIT_EXPLICIT:
      need(values, "init_values");
      return sbmvi::InitSpec::explicit_vector(std::vector<double>(values, values + len));
    default: sbmvi::fail(sbmvi::ErrorCode::InvalidConfig, "unknown init kind " + std::to_string(kind));
  }
}

template <class T>
int copy_out(const std::vector<T>& src, T* out, std::size_t len) {
  if (!out) return null_argument("out");
  if (len < src.size()) {
    last_error = "output buffer holds " + std::to_string(len) + " values, need " +
                 std::to_string(src.size());
    return SBMVI_ERR_INVALID_INPUT;
  }
  std::copy(src.begin(), src.end(), out);
  return SBMVI_OK;
}

}  // namespace

extern "C" {

const char* sbmvi_version(void) { return "0.1.0"; }

const char* sbmvi_last_error_message(void) { return last_error.c_str(); }

const char* sbmvi_status_string(int status) {
  switch (status) {
    case SBMVI_OK: return "ok";
    case SBMVI_ERR_NULL_ARGUMENT: return "null argument";
    case SBMVI_ERR_INTERNAL: return "internal error";
    default:
      if (status >= 1 && status <= 7) return sbmvi::to_string(static_cast<sbmvi::ErrorCode>(status));
      return "unknown status";
  }
}

int sbmvi_graph_generate(size_t n, int k, const double* pi, const double* b, int assignment,
                         int backend, uint64_t seed, sbmvi_graph** out) {
  if (!out) return null_argument("out");
  if (!b) return null_argument("b");
  return guarded([&] {
    sbmvi::require(k >= 1 && k <= 64, sbmvi::ErrorCode::InvalidConfig, "K out of range");
    const auto kk = static_cast<std::size_t>(k);
    sbmvi::SbmConfig c;
    c.n = n;
    c.k = k;
    c.pi = pi ? std::vector<double>(pi, pi + kk) : std::vector<double>(kk, 1.0 / k);
    c.b.assign(b, b + kk * kk);
    c.assignment = assignment == SBMVI_ASSIGN_MULTINOMIAL ? sbmvi::AssignmentMode::Multinomial
                                                          : sbmvi::AssignmentMode::ExactBalanced;
    c.backend = to_backend(backend);
    *out = new sbmvi_graph{sbmvi::generate_sbm(c, seed)};
  });
}

int sbmvi_graph_generate_two_class(size_t n, double p, double q, double pi, uint64_t seed,
                                   sbmvi_graph** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto mode =
        pi == 0.5 ? sbmvi::AssignmentMode::ExactBalanced : sbmvi::AssignmentMode::Multinomial;
    *out = new sbmvi_graph{sbmvi::generate_sbm(sbmvi::SbmConfig::two_class(n, p, q, pi, mode), seed)};
  });
}

int sbmvi_graph_from_edges(size_t n, int k, const int* labels, const uint32_t* edges,
                           size_t edge_count, int backend, sbmvi_graph** out) {
  if (!out) return null_argument("out");
  if (!labels) return null_argument("labels");
  if (!edges && edge_count > 0) return null_argument("edges");
  return guarded([&] {
    std::vector<sbmvi::Entry> list(edge_count);
    for (std::size_t e = 0; e < edge_count; ++e) list[e] = {edges[2 * e], edges[2 * e + 1]};
    *out = new sbmvi_graph{sbmvi::Graph::from_edges(n, k, std::vector<int>(labels, labels + n),
                                                    list, to_backend(backend))};
  });
}

int sbmvi_graph_load(const char* edges_path, const char* meta_path, sbmvi_graph** out) {
  if (!out) return null_argument("out");
  if (!edges_path || !meta_path) return null_argument("path");
  return guarded([&] { *out = new sbmvi_graph{sbmvi::load_graph(edges_path, meta_path)}; });
}

int sbmvi_graph_save(const sbmvi_graph* graph, const char* edges_path, const char* meta_path) {
  if (!graph) return null_argument("graph");
  if (!edges_path || !meta_path) return null_argument("path");
  return guarded([&] { sbmvi::save_graph(graph->graph, edges_path, meta_path); });
}

void sbmvi_graph_free(sbmvi_graph* graph) { delete graph; }

size_t sbmvi_graph_n(const sbmvi_graph* graph) { return graph ? graph->graph.n() : 0; }
int sbmvi_graph_k(const sbmvi_graph* graph) { return graph ? graph->graph.k() : 0; }
size_t sbmvi_graph_edge_count(const sbmvi_graph* graph) {
  return graph ? graph->graph.edge_count() : 0;
}
double sbmvi_graph_density(const sbmvi_graph* graph) {
  return graph ? graph->graph.density() : sbmvi::kNaN;
}
int sbmvi_graph_has_edge(const sbmvi_graph* graph, size_t i, size_t j) {
  if (!graph || i >= graph->graph.n() || j >= graph->graph.n()) return 0;
  return graph->graph.has_edge(i, j) ? 1 : 0;
}
int sbmvi_graph_labels(const sbmvi_graph* graph, int* out, size_t len) {
  if (!graph) return null_argument("graph");
  return copy_out(graph->graph.labels(), out, len);
}

int sbmvi_pairing_random(size_t n, uint64_t seed, sbmvi_pairing** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new sbmvi_pairing{sbmvi::random_pairing(n, seed)}; });
}

int sbmvi_pairing_create(const uint32_t* p1, const uint32_t* p2, size_t m, sbmvi_pairing** out) {
  if (!out) return null_argument("out");
  if (!p1 || !p2) return null_argument("p1/p2");
  return guarded([&] {
    *out = new sbmvi_pairing{sbmvi::Pairing(std::vector<sbmvi::Index>(p1, p1 + m),
                                            std::vector<sbmvi::Index>(p2, p2 + m))};
  });
}

void sbmvi_pairing_free(sbmvi_pairing* pairing) { delete pairing; }
size_t sbmvi_pairing_m(const sbmvi_pairing* pairing) { return pairing ? pairing->pairing.m() : 0; }

int sbmvi_pairing_nodes(const sbmvi_pairing* pairing, uint32_t* p1, uint32_t* p2, size_t m) {
  if (!pairing) return null_argument("pairing");
  const int s = copy_out(pairing->pairing.p1(), p1, m);
  return s != SBMVI_OK ? s : copy_out(pairing->pairing.p2(), p2, m);
}

void sbmvi_vips_options_default(sbmvi_vips_options* o) {
  if (!o) return;
  const sbmvi::VipsConfig c;
  *o = sbmvi_vips_options{c.p_hat, c.q_hat, c.pi, 0, c.param_update_start, c.max_meta_iters,
                          c.tol, SBMVI_INIT_BERNOULLI, 0.5, nullptr, 0, 0};
}

void sbmvi_mfvi_options_default(sbmvi_mfvi_options* o) {
  if (!o) return;
  const sbmvi::MfviConfig c;
  *o = sbmvi_mfvi_options{2, 0.5, c.p_hat, c.q_hat, 0, c.param_update_start, c.max_iters,
                          c.tol, SBMVI_INIT_BERNOULLI, 0.5, nullptr, 0, 0};
}

int sbmvi_run_vips(const sbmvi_graph* graph, const sbmvi_pairing* pairing,
                   const sbmvi_vips_options* o, uint64_t seed, sbmvi_result** out) {
  if (!graph || !pairing || !o || !out) return null_argument("graph/pairing/options/out");
  return guarded([&] {
    sbmvi::VipsConfig c;
    c.p_hat = o->p_hat;
    c.q_hat = o->q_hat;
    c.pi = o->pi;
    c.update_params = o->update_params != 0;
    c.param_update_start = o->param_update_start;
    c.max_meta_iters = o->max_meta_iters;
    c.tol = o->tol;
    c.init = to_init(o->init_kind, o->init_value, o->init_values, o->init_len);
    c.run_to_max = o->run_to_max != 0;
    auto run = sbmvi::run_vips(graph->graph, pairing->pairing, c, seed);
    auto* r = new sbmvi_result;
    r->n = graph->graph.n();
    r->labels = sbmvi::hard_labels(run.u_nodes);
    r->memberships = std::move(run.u_nodes);
    r->converged = run.record.converged;
    r->p_hat = run.p_hat;
    r->q_hat = run.q_hat;
    r->record = std::move(run.record.iterations);
    *out = r;
  });
}

int sbmvi_run_vips_general(const sbmvi_graph* graph, const sbmvi_pairing* pairing, int k,
                           double p_hat, double q_hat, int max_meta_iters, double tol,
                           uint64_t seed, sbmvi_result** out) {
  if (!graph || !pairing || !out) return null_argument("graph/pairing/out");
  return guarded([&] {
    sbmvi::GeneralVipsConfig c;
    c.k = k;
    c.p_hat = p_hat;
    c.q_hat = q_hat;
    c.max_meta_iters = max_meta_iters;
    c.tol = tol;
    auto run = sbmvi::run_vips_general(graph->graph, pairing->pairing, c, seed);
    auto* r = new sbmvi_result;
    r->n = graph->graph.n();
    r->columns = k;
    r->labels = std::move(run.labels);
    r->memberships = std::move(run.u_nodes);
    r->converged = run.record.converged;
    r->p_hat = p_hat;
    r->q_hat = q_hat;
    r->record = std::move(run.record.iterations);
    *out = r;
  });
}

int sbmvi_run_mfvi(const sbmvi_graph* graph, const sbmvi_mfvi_options* o, uint64_t seed,
                   sbmvi_result** out) {
  if (!graph || !o || !out) return null_argument("graph/options/out");
  return guarded([&] {
    sbmvi::MfviConfig c;
    c.k = o->k;
    if (o->k == 2) c.pi = {1.0 - o->pi, o->pi};
    c.p_hat = o->p_hat;
    c.q_hat = o->q_hat;
    c.update_params = o->update_params != 0;
    c.param_update_start = o->param_update_start;
    c.max_iters = o->max_iters;
    c.tol = o->tol;
    c.run_to_max = o->run_to_max != 0;
    if (o->k == 2) c.init = to_init(o->init_kind, o->init_value, o->init_values, o->init_len);
    auto run = sbmvi::run_mfvi(graph->graph, c, seed);
    auto* r = new sbmvi_result;
    r->n = graph->graph.n();
    r->columns = o->k == 2 ? 1 : o->k;
    r->labels = std::move(run.labels);
    r->memberships = std::move(run.u);
    r->converged = run.record.converged;
    r->p_hat = run.p_hat;
    r->q_hat = run.q_hat;
    r->record = std::move(run.record.iterations);
    *out = r;
  });
}

int sbmvi_run_bp(const sbmvi_graph* graph, double p, double q, double pi, int k, double damping,
                 int max_iters, double tol, uint64_t seed, sbmvi_result** out) {
  if (!graph || !out) return null_argument("graph/out");
  return guarded([&] {
    sbmvi::require(k >= 2, sbmvi::ErrorCode::InvalidConfig, "K must be at least 2");
    std::vector<double> prior = k == 2 ? std::vector<double>{1.0 - pi, pi}
                                       : std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
    sbmvi::BpConfig c;
    c.damping = damping;
    c.max_iters = max_iters;
    c.tol = tol;
    auto run = sbmvi::run_bp(graph->graph, p, q, prior, k, c, seed);
    auto* r = new sbmvi_result;
    r->n = graph->graph.n();
    r->columns = k;
    r->labels = std::move(run.labels);
    r->memberships = std::move(run.beliefs);
    r->converged = run.converged;
    r->record = std::move(run.record.iterations);
    *out = r;
  });
}

int sbmvi_run_spectral(const sbmvi_graph* graph, int k, uint64_t seed, sbmvi_result** out) {
  if (!graph || !out) return null_argument("graph/out");
  return guarded([&] {
    auto run = sbmvi::spectral_cluster(graph->graph, k, seed);
    auto* r = new sbmvi_result;
    r->n = graph->graph.n();
    r->columns = k;
    r->memberships = std::move(run.eigenvectors);
    r->converged = run.converged;
    sbmvi::IterationMetrics it;
    it.iteration = run.iterations;
    it.nmi = sbmvi::nmi(run.labels, graph->graph.labels());
    r->record.push_back(it);
    r->labels = std::move(run.labels);
    *out = r;
  });
}

void sbmvi_result_free(sbmvi_result* result) { delete result; }
size_t sbmvi_result_n(const sbmvi_result* result) { return result ? result->n : 0; }
int sbmvi_result_columns(const sbmvi_result* result) { return result ? result->columns : 0; }

int sbmvi_result_labels(const sbmvi_result* result, int* out, size_t len) {
  if (!result) return null_argument("result");
  return copy_out(result->labels, out, len);
}

int sbmvi_result_memberships(const sbmvi_result* result, double* out, size_t len) {
  if (!result) return null_argument("result");
  return copy_out(result->memberships, out, len);
}

int sbmvi_result_converged(const sbmvi_result* result) {
  return result && result->converged ? 1 : 0;
}
double sbmvi_result_p_hat(const sbmvi_result* result) {
  return result ? result->p_hat : sbmvi::kNaN;
}
double sbmvi_result_q_hat(const sbmvi_result* result) {
  return result ? result->q_hat : sbmvi::kNaN;
}
size_t sbmvi_result_record_count(const sbmvi_result* result) {
  return result ? result->record.size() : 0;
}

int sbmvi_result_metric(const sbmvi_result* result, size_t index, const char* metric,
                        double* out) {
  if (!result || !metric || !out) return null_argument("result/metric/out");
  if (index >= result->record.size()) {
    last_error = "record index out of range";
    return SBMVI_ERR_INVALID_INPUT;
  }
  const auto& it = result->record[index];
  const std::string m = metric;
  if (m == "l1") *out = it.l1;
  else if (m == "nmi") *out = it.nmi;
  else if (m == "elbo") *out = it.elbo;
  else if (m == "signal_projection") *out = it.signal_projection;
  else if (m == "drift") *out = it.drift;
  else if (m == "p_hat") *out = it.p_hat;
  else if (m == "q_hat") *out = it.q_hat;
  else if (m == "iteration") *out = it.iteration;
  else {
    last_error = "unknown metric '" + m + "'";
    return SBMVI_ERR_INVALID_INPUT;
  }
  return SBMVI_OK;
}

int sbmvi_logit_constants(double p, double q, double* t, double* lambda) {
  if (!t || !lambda) return null_argument("t/lambda");
  return guarded([&] {
    const auto c = sbmvi::logit_constants(p, q);
    *t = c.t;
    *lambda = c.lambda;
  });
}

int sbmvi_l1_to_truth(const double* u, const int* z, size_t n, double* out) {
  if (!u || !z || !out) return null_argument("u/z/out");
  return guarded([&] { *out = sbmvi::l1_to_truth({u, n}, {z, n}); });
}

int sbmvi_nmi(const int* a, const int* b, size_t n, double* out) {
  if (!a || !b || !out) return null_argument("a/b/out");
  return guarded([&] { *out = sbmvi::nmi({a, n}, {b, n}); });
}

int sbmvi_experiment_run(const char* kind, const char* config_json, sbmvi_experiment** out) {
  if (!kind || !out) return null_argument("kind/out");
  return guarded([&] {
    auto config = sbmvi::ExperimentConfig::defaults(sbmvi::parse_experiment_kind(kind));
    if (config_json) config = sbmvi::ExperimentConfig::from_json(config_json, config);
    sbmvi::require(std::string(sbmvi::to_string(config.kind)) == kind,
                   sbmvi::ErrorCode::InvalidConfig,
                   "config kind does not match the requested experiment");
    auto* e = new sbmvi_experiment;
    try {
      e->result = sbmvi::run_experiment(config);
      e->csv = sbmvi::results_csv(e->result.rows);
    } catch (...) {
      delete e;
      throw;
    }
    *out = e;
  });
}

void sbmvi_experiment_free(sbmvi_experiment* experiment) { delete experiment; }

size_t sbmvi_experiment_row_count(const sbmvi_experiment* experiment) {
  return experiment ? experiment->result.rows.size() : 0;
}

const char* sbmvi_experiment_csv(const sbmvi_experiment* experiment) {
  return experiment ? experiment->csv.c_str() : nullptr;
}

const char* sbmvi_experiment_summary(const sbmvi_experiment* experiment) {
  return experiment ? experiment->result.summary_json.c_str() : nullptr;
}

int sbmvi_experiment_write(const sbmvi_experiment* experiment, const char* dir) {
  if (!experiment || !dir) return null_argument("experiment/dir");
  return guarded([&] { sbmvi::write_outputs(experiment->result, dir); });
}

}  // extern "C"
