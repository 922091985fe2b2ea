#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace slm {

/// Deterministic random stream. The engine is std::mt19937_64 (fully
/// specified by the standard); all variate transforms are implemented here
/// so draws are identical across standard library implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  /// Independent stream keyed by (seed, path...).
  static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Unbiased integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  double normal();
  double exponential();
  /// Gamma(shape, rate).
  double gamma(double shape, double rate = 1.0);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace slm
