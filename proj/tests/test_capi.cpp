#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "sbmvi/sbmvi.h"

TEST_CASE("graph and pairing handles") {
  sbmvi_graph* g = nullptr;
  REQUIRE(sbmvi_graph_generate_two_class(200, 0.3, 0.05, 0.5, 1, &g) == SBMVI_OK);
  CHECK(sbmvi_graph_n(g) == 200);
  CHECK(sbmvi_graph_k(g) == 2);
  CHECK(sbmvi_graph_density(g) > 0);
  std::vector<int> labels(200);
  CHECK(sbmvi_graph_labels(g, labels.data(), labels.size()) == SBMVI_OK);
  CHECK(sbmvi_graph_labels(g, labels.data(), 10) == SBMVI_ERR_INVALID_INPUT);

  sbmvi_pairing* p = nullptr;
  REQUIRE(sbmvi_pairing_random(200, 2, &p) == SBMVI_OK);
  CHECK(sbmvi_pairing_m(p) == 100);
  std::vector<uint32_t> p1(100), p2(100);
  CHECK(sbmvi_pairing_nodes(p, p1.data(), p2.data(), 100) == SBMVI_OK);

  sbmvi_vips_options vo;
  sbmvi_vips_options_default(&vo);
  vo.p_hat = 0.3;
  vo.q_hat = 0.05;
  sbmvi_result* r = nullptr;
  REQUIRE(sbmvi_run_vips(g, p, &vo, 3, &r) == SBMVI_OK);
  CHECK(sbmvi_result_converged(r) == 1);
  CHECK(sbmvi_result_columns(r) == 1);
  std::vector<double> u(200);
  CHECK(sbmvi_result_memberships(r, u.data(), u.size()) == SBMVI_OK);
  double l1 = -1;
  CHECK(sbmvi_l1_to_truth(u.data(), labels.data(), 200, &l1) == SBMVI_OK);
  CHECK(l1 < 1e-6);
  const size_t last = sbmvi_result_record_count(r) - 1;
  double value = -1;
  CHECK(sbmvi_result_metric(r, last, "nmi", &value) == SBMVI_OK);
  CHECK(value == doctest::Approx(1.0));
  CHECK(sbmvi_result_metric(r, last, "bogus", &value) == SBMVI_ERR_INVALID_INPUT);
  CHECK(sbmvi_result_metric(r, last + 5, "l1", &value) == SBMVI_ERR_INVALID_INPUT);
  sbmvi_result_free(r);

  sbmvi_mfvi_options mo;
  sbmvi_mfvi_options_default(&mo);
  mo.p_hat = 0.3;
  mo.q_hat = 0.05;
  REQUIRE(sbmvi_run_mfvi(g, &mo, 4, &r) == SBMVI_OK);
  CHECK(sbmvi_result_n(r) == 200);
  sbmvi_result_free(r);

  REQUIRE(sbmvi_run_bp(g, 0.3, 0.05, 0.5, 2, 0.5, 200, 1e-6, 5, &r) == SBMVI_OK);
  CHECK(sbmvi_result_columns(r) == 2);
  sbmvi_result_free(r);

  REQUIRE(sbmvi_run_spectral(g, 2, 6, &r) == SBMVI_OK);
  std::vector<int> sl(200);
  CHECK(sbmvi_result_labels(r, sl.data(), sl.size()) == SBMVI_OK);
  double score = 0;
  CHECK(sbmvi_nmi(sl.data(), labels.data(), 200, &score) == SBMVI_OK);
  CHECK(score > 0.9);
  sbmvi_result_free(r);

  REQUIRE(sbmvi_run_vips_general(g, p, 2, 0.3, 0.05, 100, 1e-6, 7, &r) == SBMVI_OK);
  CHECK(sbmvi_result_columns(r) == 2);
  sbmvi_result_free(r);

  sbmvi_pairing_free(p);
  sbmvi_graph_free(g);
}

TEST_CASE("errors carry codes and messages") {
  sbmvi_graph* g = nullptr;
  CHECK(sbmvi_graph_generate_two_class(7, 0.3, 0.05, 0.5, 1, &g) == SBMVI_ERR_INVALID_CONFIG);
  CHECK(g == nullptr);
  CHECK(std::strlen(sbmvi_last_error_message()) > 0);
  CHECK(sbmvi_graph_generate_two_class(8, 0.3, 0.05, 0.5, 1, nullptr) == SBMVI_ERR_NULL_ARGUMENT);
  double t, l;
  CHECK(sbmvi_logit_constants(0.2, 0.2, &t, &l) == SBMVI_ERR_DEGENERATE_PARAMETERS);
  CHECK(sbmvi_logit_constants(0.2, 0.01, &t, &l) == SBMVI_OK);
  CHECK(t == doctest::Approx(1.6044127).epsilon(1e-7));
  CHECK(std::string(sbmvi_status_string(SBMVI_OK)) == "ok");
  sbmvi_pairing* p = nullptr;
  CHECK(sbmvi_pairing_random(5, 1, &p) == SBMVI_ERR_INVALID_INPUT);
  const uint32_t a[] = {0, 1}, b[] = {1, 2};
  CHECK(sbmvi_pairing_create(a, b, 2, &p) != SBMVI_OK);
  sbmvi_experiment* e = nullptr;
  CHECK(sbmvi_experiment_run("fig9", nullptr, &e) == SBMVI_ERR_INVALID_CONFIG);
  CHECK(sbmvi_experiment_run("sweep", "{\"trials\": 0}", &e) == SBMVI_ERR_INVALID_CONFIG);
  CHECK(sbmvi_experiment_run("sweep", "{\"kind\": \"heatmap\"}", &e) == SBMVI_ERR_INVALID_CONFIG);
  sbmvi_graph_free(nullptr);
  CHECK(sbmvi_graph_n(nullptr) == 0);
}

TEST_CASE("from edges and experiments through the C API") {
  const int labels[] = {0, 0, 1, 1};
  const uint32_t edges[] = {0, 1, 2, 3};
  sbmvi_graph* g = nullptr;
  REQUIRE(sbmvi_graph_from_edges(4, 2, labels, edges, 2, SBMVI_BACKEND_SPARSE, &g) == SBMVI_OK);
  CHECK(sbmvi_graph_edge_count(g) == 2);
  CHECK(sbmvi_graph_has_edge(g, 1, 0) == 1);
  CHECK(sbmvi_graph_has_edge(g, 1, 2) == 0);
  sbmvi_graph_free(g);

  sbmvi_experiment* e = nullptr;
  REQUIRE(sbmvi_experiment_run("convergence", "{\"n\": 60, \"trials\": 1, \"ticks\": 4}", &e) ==
          SBMVI_OK);
  CHECK(sbmvi_experiment_row_count(e) == 2 * 3 * 4);
  const std::string csv = sbmvi_experiment_csv(e);
  CHECK(csv.rfind("experiment,algorithm,trial,iteration,metric,value", 0) == 0);
  CHECK(std::string(sbmvi_experiment_summary(e)).find("\"kind\"") != std::string::npos);
  sbmvi_experiment_free(e);
}
