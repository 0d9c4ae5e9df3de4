#pragma once

#include <cstdint>
#include <random>

namespace lse {

// Deterministic random source. All transforms (normal, gamma, Student-t)
// are implemented here rather than via std:: distributions, whose output
// is implementation defined; given a seed the stream is reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Derives an independent seed for a named substream.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t integer() { return eng_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) %
           (n == 0 ? 1 : n);
  }

  double normal();

  // Gamma(shape, 1), Marsaglia–Tsang.
  double gamma(double shape);

  // Standardized Student-t with nu > 0 degrees of freedom.
  double student_t(double nu);

 private:
  std::mt19937_64 eng_;
};

}  // namespace lse
