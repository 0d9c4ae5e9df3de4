#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "lse/rng.hpp"

namespace lse {

// Sobol sequence on [0,1)^d for d <= 6, with optional digital-shift
// scrambling. The origin point (index 0) is skipped.
class Sobol {
 public:
  explicit Sobol(int dim, std::uint64_t scramble_seed = 0);

  Eigen::VectorXd next();
  Eigen::MatrixXd sample(int n);

  int dim() const { return dim_; }

 private:
  int dim_;
  std::uint64_t index_ = 0;
  Eigen::Matrix<std::uint32_t, Eigen::Dynamic, Eigen::Dynamic> dirs_;  // d x 32
  Eigen::Matrix<std::uint32_t, Eigen::Dynamic, 1> state_;
  Eigen::Matrix<std::uint32_t, Eigen::Dynamic, 1> shift_;
};

// Latin hypercube design on [0,1)^d: one point per axis stratum in every
// dimension, jittered within the stratum.
Eigen::MatrixXd lhs_unit(int n, int dim, Rng& rng);

}  // namespace lse
