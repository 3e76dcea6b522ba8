#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sbmvi {

class Pairing;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Metrics for one recorded iteration. Fields that an algorithm does not
/// produce stay NaN and are omitted from CSV output.
struct IterationMetrics {
  int iteration = 0;   // tick index; VIPS records 3 ticks per meta iteration
  int meta = -1;       // VIPS meta-iteration index, -1 elsewhere
  double l1 = kNaN;
  double nmi = kNaN;
  double elbo = kNaN;
  double signal_projection = kNaN;
  double drift = kNaN;
  double p_hat = kNaN;
  double q_hat = kNaN;
};

struct TrialRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<IterationMetrics> iterations;
  bool converged = false;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
  std::string config_json;

  const IterationMetrics& final() const { return iterations.back(); }
};

/// min(|u - z|_1, |u - (1 - z)|_1) for binary labels z.
double l1_to_truth(std::span<const double> u, std::span<const int> z);

/// u is n x K row-major; minimum over all K! label permutations sigma of
/// sum_i (1 - u[i, sigma(z_i)]). K <= 6.
double l1_to_truth_general(std::span<const double> u, std::span<const int> z, int k);

/// I(a;b) / sqrt(H(a) H(b)). Zero entropy gives 0 unless both partitions are
/// the same single cluster, which gives 1.
double nmi(std::span<const int> a, std::span<const int> b);

/// u >= 1/2 maps to label 1.
std::vector<int> hard_labels(std::span<const double> u);
/// Row-wise argmax of an n x K matrix; ties go to the lowest label.
std::vector<int> hard_labels_general(std::span<const double> u, int k);

struct SignalProjection {
  double projection = 0.0;  // <u, v2>
  double drift = 0.0;       // <u, 1> - m
};

/// u in pairing order (phi, xi); v2 = (1_{C1} - 1_{C2}, 1_{C1'} - 1_{C2'}).
SignalProjection signal_projection(std::span<const double> u, std::span<const int> z,
                                   const Pairing& pairing);

/// Exact recovery: hard labels agree with z up to a label permutation.
bool exact_recovery(std::span<const int> labels, std::span<const int> z, int k);

}  // namespace sbmvi
