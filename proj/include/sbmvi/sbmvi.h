#ifndef SBMVI_SBMVI_H
#define SBMVI_SBMVI_H

#include <stddef.h>
#include <stdint.h>

#if defined(SBMVI_BUILDING_LIBRARY)
#define SBMVI_API __attribute__((visibility("default")))
#else
#define SBMVI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one of these; on failure the
 * message is available from sbmvi_last_error_message() on the same thread. */
typedef enum sbmvi_status {
  SBMVI_OK = 0,
  SBMVI_ERR_INVALID_CONFIG = 1,
  SBMVI_ERR_INVALID_INPUT = 2,
  SBMVI_ERR_DEGENERATE_PARAMETERS = 3,
  SBMVI_ERR_NUMERIC = 4,
  SBMVI_ERR_ESTIMATION = 5,
  SBMVI_ERR_DOMAIN = 6,
  SBMVI_ERR_IO = 7,
  SBMVI_ERR_NULL_ARGUMENT = 8,
  SBMVI_ERR_INTERNAL = 99
} sbmvi_status;

typedef enum sbmvi_assignment {
  SBMVI_ASSIGN_EXACT_BALANCED = 0,
  SBMVI_ASSIGN_MULTINOMIAL = 1
} sbmvi_assignment;

typedef enum sbmvi_backend {
  SBMVI_BACKEND_AUTO = 0,
  SBMVI_BACKEND_DENSE = 1,
  SBMVI_BACKEND_SPARSE = 2
} sbmvi_backend;

typedef enum sbmvi_init_kind {
  SBMVI_INIT_BERNOULLI = 0,
  SBMVI_INIT_CONSTANT = 1,
  SBMVI_INIT_UNIFORM = 2,
  SBMVI_INIT_EXPLICIT = 3
} sbmvi_init_kind;

typedef struct sbmvi_graph sbmvi_graph;
typedef struct sbmvi_pairing sbmvi_pairing;
typedef struct sbmvi_result sbmvi_result;
typedef struct sbmvi_experiment sbmvi_experiment;

SBMVI_API const char* sbmvi_version(void);
SBMVI_API const char* sbmvi_last_error_message(void);
SBMVI_API const char* sbmvi_status_string(int status);

/* ---- graphs ------------------------------------------------------------ */

/* pi has length k (NULL for uniform); b is k x k row-major. */
SBMVI_API int sbmvi_graph_generate(size_t n, int k, const double* pi, const double* b,
                                   int assignment, int backend, uint64_t seed,
                                   sbmvi_graph** out);
/* B11 = B22 = p, B12 = q; label 1 has probability pi. pi = 0.5 uses exact
 * balanced assignment, anything else multinomial. */
SBMVI_API int sbmvi_graph_generate_two_class(size_t n, double p, double q, double pi,
                                             uint64_t seed, sbmvi_graph** out);
/* Edges as (u, v) pairs in a flat array of length 2 * edge_count. */
SBMVI_API int sbmvi_graph_from_edges(size_t n, int k, const int* labels, const uint32_t* edges,
                                     size_t edge_count, int backend, sbmvi_graph** out);
SBMVI_API int sbmvi_graph_load(const char* edges_path, const char* meta_path, sbmvi_graph** out);
SBMVI_API int sbmvi_graph_save(const sbmvi_graph* graph, const char* edges_path,
                               const char* meta_path);
SBMVI_API void sbmvi_graph_free(sbmvi_graph* graph);

SBMVI_API size_t sbmvi_graph_n(const sbmvi_graph* graph);
SBMVI_API int sbmvi_graph_k(const sbmvi_graph* graph);
SBMVI_API size_t sbmvi_graph_edge_count(const sbmvi_graph* graph);
SBMVI_API double sbmvi_graph_density(const sbmvi_graph* graph);
SBMVI_API int sbmvi_graph_has_edge(const sbmvi_graph* graph, size_t i, size_t j);
SBMVI_API int sbmvi_graph_labels(const sbmvi_graph* graph, int* out, size_t len);

/* ---- pairings ---------------------------------------------------------- */

SBMVI_API int sbmvi_pairing_random(size_t n, uint64_t seed, sbmvi_pairing** out);
SBMVI_API int sbmvi_pairing_create(const uint32_t* p1, const uint32_t* p2, size_t m,
                                   sbmvi_pairing** out);
SBMVI_API void sbmvi_pairing_free(sbmvi_pairing* pairing);
SBMVI_API size_t sbmvi_pairing_m(const sbmvi_pairing* pairing);
SBMVI_API int sbmvi_pairing_nodes(const sbmvi_pairing* pairing, uint32_t* p1, uint32_t* p2,
                                  size_t m);

/* ---- algorithms -------------------------------------------------------- */

typedef struct sbmvi_vips_options {
  double p_hat;
  double q_hat;
  double pi; /* P(label 1) */
  int update_params;
  int param_update_start;
  int max_meta_iters;
  double tol;
  int init_kind;             /* sbmvi_init_kind */
  double init_value;         /* Bernoulli mean or constant */
  const double* init_values; /* explicit init in pairing order */
  size_t init_len;
  int run_to_max;
} sbmvi_vips_options;

typedef struct sbmvi_mfvi_options {
  int k;
  double pi; /* P(label 1) for k = 2; ignored (uniform) otherwise */
  double p_hat;
  double q_hat;
  int update_params;
  int param_update_start;
  int max_iters;
  double tol;
  int init_kind;             /* k = 2 only; k > 2 uses Dirichlet(1) */
  double init_value;
  const double* init_values; /* node order */
  size_t init_len;
  int run_to_max;
} sbmvi_mfvi_options;

SBMVI_API void sbmvi_vips_options_default(sbmvi_vips_options* options);
SBMVI_API void sbmvi_mfvi_options_default(sbmvi_mfvi_options* options);

SBMVI_API int sbmvi_run_vips(const sbmvi_graph* graph, const sbmvi_pairing* pairing,
                             const sbmvi_vips_options* options, uint64_t seed,
                             sbmvi_result** out);
/* K-class pairwise engine with a planted-partition working model and
 * uniform class probabilities; Dirichlet(1) initialization. */
SBMVI_API int sbmvi_run_vips_general(const sbmvi_graph* graph, const sbmvi_pairing* pairing,
                                     int k, double p_hat, double q_hat, int max_meta_iters,
                                     double tol, uint64_t seed, sbmvi_result** out);
SBMVI_API int sbmvi_run_mfvi(const sbmvi_graph* graph, const sbmvi_mfvi_options* options,
                             uint64_t seed, sbmvi_result** out);
/* pi is P(label 1) for k = 2 and ignored (uniform) otherwise. */
SBMVI_API int sbmvi_run_bp(const sbmvi_graph* graph, double p, double q, double pi, int k,
                           double damping, int max_iters, double tol, uint64_t seed,
                           sbmvi_result** out);
SBMVI_API int sbmvi_run_spectral(const sbmvi_graph* graph, int k, uint64_t seed,
                                 sbmvi_result** out);

SBMVI_API void sbmvi_result_free(sbmvi_result* result);
SBMVI_API size_t sbmvi_result_n(const sbmvi_result* result);
/* Columns of the membership matrix: 1 for two-class soft results, K otherwise. */
SBMVI_API int sbmvi_result_columns(const sbmvi_result* result);
SBMVI_API int sbmvi_result_labels(const sbmvi_result* result, int* out, size_t len);
/* Node-order memberships, n * columns values. */
SBMVI_API int sbmvi_result_memberships(const sbmvi_result* result, double* out, size_t len);
SBMVI_API int sbmvi_result_converged(const sbmvi_result* result);
SBMVI_API double sbmvi_result_p_hat(const sbmvi_result* result);
SBMVI_API double sbmvi_result_q_hat(const sbmvi_result* result);
/* Recorded iterations (ticks). Metric names: l1, nmi, elbo,
 * signal_projection, drift, p_hat, q_hat. Missing values are NaN. */
SBMVI_API size_t sbmvi_result_record_count(const sbmvi_result* result);
SBMVI_API int sbmvi_result_metric(const sbmvi_result* result, size_t index, const char* metric,
                                  double* out);

/* ---- metrics and model constants --------------------------------------- */

SBMVI_API int sbmvi_logit_constants(double p, double q, double* t, double* lambda);
SBMVI_API int sbmvi_l1_to_truth(const double* u, const int* z, size_t n, double* out);
SBMVI_API int sbmvi_nmi(const int* a, const int* b, size_t n, double* out);

/* ---- experiments ------------------------------------------------------- */

/* kind: convergence, heatmap, sweep, general, ablation. config_json is a
 * flat JSON object overlaid on the kind's defaults (NULL for defaults). */
SBMVI_API int sbmvi_experiment_run(const char* kind, const char* config_json,
                                   sbmvi_experiment** out);
SBMVI_API void sbmvi_experiment_free(sbmvi_experiment* experiment);
SBMVI_API size_t sbmvi_experiment_row_count(const sbmvi_experiment* experiment);
/* Borrowed strings, valid until the experiment is freed. */
SBMVI_API const char* sbmvi_experiment_csv(const sbmvi_experiment* experiment);
SBMVI_API const char* sbmvi_experiment_summary(const sbmvi_experiment* experiment);
SBMVI_API int sbmvi_experiment_write(const sbmvi_experiment* experiment, const char* dir);

#ifdef __cplusplus
}
#endif

#endif
