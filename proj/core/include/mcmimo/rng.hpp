#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace mcmimo {

// Deterministic random stream. All samplers are built on top of the raw
// 64-bit output of mt19937_64 so that draws are identical across standard
// library implementations (std::*_distribution is not portable).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform();

  /// Standard normal, Box-Muller.
  double normal();

  /// Circularly symmetric complex Gaussian with unit total variance,
  /// i.e. real and imaginary parts ~ N(0, 1/2).
  std::complex<double> complex_normal();

  /// Exponential with the given mean (mean > 0).
  double exponential(double mean);

  /// Poisson count (Knuth's product method; intended for small means).
  int poisson(double mean);

  /// Pareto with given shape and scale; samples are >= scale.
  double pareto(double shape, double scale);

 private:
  std::mt19937_64 eng_;
};

/// Derives a child seed from a root seed, a textual label and an index, so
/// each (module, run) pair owns an independent reproducible stream.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index = 0);

inline RngStream split_stream(std::uint64_t root, std::string_view label, std::uint64_t index = 0) {
  return RngStream(derive_seed(root, label, index));
}

}  // namespace mcmimo
