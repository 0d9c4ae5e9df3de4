#include "lse/sobol.hpp"

#include <bit>
#include <stdexcept>
#include <vector>

namespace lse {

namespace {

struct DimSpec {
  int s;
  std::uint32_t a;
  std::uint32_t m[6];
};

// Joe–Kuo direction numbers for dimensions 2..6 (dimension 1 is the
// van der Corput sequence).
constexpr DimSpec kDims[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
};
constexpr int kBits = 32;

}  // namespace

Sobol::Sobol(int dim, std::uint64_t scramble_seed) : dim_(dim) {
  if (dim < 1 || dim > 6)
    throw std::invalid_argument("Sobol: dimension must be in [1,6]");
  dirs_.resize(dim, kBits);
  state_.setZero(dim);
  shift_.setZero(dim);

  // First dimension.
  for (int k = 0; k < kBits; ++k)
    dirs_(0, k) = 1u << (kBits - 1 - k);

  for (int j = 1; j < dim; ++j) {
    const DimSpec& sp = kDims[j - 1];
    const int s = sp.s;
    std::vector<std::uint32_t> m(sp.m, sp.m + s);
    for (int k = 0; k < kBits; ++k) {
      if (k < s) {
        dirs_(j, k) = m[k] << (kBits - 1 - k);
      } else {
        std::uint32_t v = dirs_(j, k - s) ^ (dirs_(j, k - s) >> s);
        for (int t = 1; t < s; ++t)
          if ((sp.a >> (s - 1 - t)) & 1u) v ^= dirs_(j, k - t);
        dirs_(j, k) = v;
      }
    }
  }

  if (scramble_seed != 0) {
    Rng rng(scramble_seed);
    for (int j = 0; j < dim; ++j)
      shift_[j] = static_cast<std::uint32_t>(rng.integer() >> 32);
  }
}

Eigen::VectorXd Sobol::next() {
  // Gray-code order: point i is emitted before the state advances, so a
  // power-of-two block starting at index 0 is a digital net.
  Eigen::VectorXd out(dim_);
  for (int j = 0; j < dim_; ++j)
    out[j] = static_cast<double>(state_[j] ^ shift_[j]) * 0x1.0p-32;
  const int c = std::countr_zero(~index_);  // lowest zero bit
  ++index_;
  for (int j = 0; j < dim_; ++j) state_[j] ^= dirs_(j, c);
  return out;
}

Eigen::MatrixXd Sobol::sample(int n) {
  Eigen::MatrixXd out(n, dim_);
  for (int i = 0; i < n; ++i) out.row(i) = next().transpose();
  return out;
}

Eigen::MatrixXd lhs_unit(int n, int dim, Rng& rng) {
  Eigen::MatrixXd out(n, dim);
  std::vector<int> perm(n);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.index(static_cast<std::size_t>(i + 1))]);
    for (int i = 0; i < n; ++i)
      out(i, j) = (static_cast<double>(perm[i]) + rng.uniform()) /
                  static_cast<double>(n);
  }
  return out;
}

}  // namespace lse
