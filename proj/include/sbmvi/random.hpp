#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace sbmvi {

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Stateless 64-bit mixer used for seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Seed splitting rule for experiments:
//   trial_seed = mix(mix(master ^ fnv1a(experiment_id)) + trial_index)
// The same rule derives per-purpose substreams from a trial seed.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index) noexcept;

/// xoshiro256** with portable distribution helpers, so that a fixed seed
/// yields the same stream on every platform and standard library.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform double in (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double exponential() noexcept;
  double normal() noexcept;

  template <class T>
  void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace sbmvi
