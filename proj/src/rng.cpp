#include "lse/rng.hpp"

#include <cmath>

#include "lse/stats.hpp"

namespace lse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x51ED2701ull));
}

double Rng::normal() {
  // Inverse-cdf transform; u is bounded away from {0,1} by the 53-bit grid.
  double u = uniform();
  if (u <= 0.0) u = 0x1.0p-53;
  return stats::norm_quantile(u);
}

double Rng::gamma(double shape) {
  if (shape < 1.0) {
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u > 0 ? u : 0x1.0p-53, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

double Rng::student_t(double nu) {
  const double z = normal();
  const double g = gamma(0.5 * nu);  // chi^2_nu = 2*Gamma(nu/2)
  return z / std::sqrt(2.0 * g / nu);
}

}  // namespace lse
