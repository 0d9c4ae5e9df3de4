#pragma once

#include <functional>
#include <string>

#include "lse/rng.hpp"

#include <Eigen/Core>

namespace lse {

struct SyntheticFunction {
  std::string name;
  int dim = 1;
  std::function<double(const Eigen::VectorXd&)> eval;

  double operator()(const Eigen::VectorXd& x) const { return eval(x); }
};

// quadratic1d, braninhoo2d, hartman6; all on [0,1]^d.
SyntheticFunction make_synthetic(const std::string& name);

// Response range over a 1e5-point Sobol sample (cached per function).
double synthetic_range(const SyntheticFunction& fn);

enum class NoiseKind { t_small, t_large, gsn_mix, t_hetero };

NoiseKind noise_kind_from_string(const std::string& s);
std::string to_string(NoiseKind k);

// Observation-noise generator. Student-t parameters are interpreted so
// that the quoted magnitude is the distribution's standard deviation
// (scale = sd * sqrt((nu-2)/nu)); heteroskedastic degrees of freedom are
// clamped at 2.1 to keep the variance finite.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::t_small;
  double r_f = 1.0;

  double sd(const Eigen::VectorXd& x) const;
  double dof(const Eigen::VectorXd& x) const;  // NaN for gaussian mixture
  double sample(const Eigen::VectorXd& x, Rng& rng) const;
};

NoiseSpec make_noise(NoiseKind kind, double r_f);

}  // namespace lse
