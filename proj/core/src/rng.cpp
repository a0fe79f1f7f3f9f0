#include "mcmimo/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcmimo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

double RngStream::uniform() {
  // 53-bit mantissa from the top bits of a 64-bit draw.
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::complex<double> RngStream::complex_normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-std::log1p(-u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

double RngStream::exponential(double mean) {
  if (!(mean > 0.0)) throw std::invalid_argument("exponential: mean must be > 0");
  return -mean * std::log1p(-uniform());
}

int RngStream::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean > 64.0) throw std::invalid_argument("poisson: mean too large for product method");
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform();
  } while (p > limit);
  return k - 1;
}

double RngStream::pareto(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw std::invalid_argument("pareto: shape and scale must be > 0");
  return scale * std::pow(1.0 - uniform(), -1.0 / shape);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) {
  std::uint64_t x = splitmix64(root ^ fnv1a64(label));
  x = splitmix64(x ^ splitmix64(index));
  return x;
}

}  // namespace mcmimo
