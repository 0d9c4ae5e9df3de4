#pragma once

#include <memory>
#include <string>

#include "lse/clgp.hpp"
#include "lse/gp.hpp"
#include "lse/monotone.hpp"
#include "lse/tgp.hpp"
#include "lse/tp.hpp"

namespace lse {

enum class SurrogateKind { gp, tgp, clgp, tp, mgp, mclgp };

SurrogateKind surrogate_kind_from_string(const std::string& s);
std::string to_string(SurrogateKind k);

struct FitOptions {
  SurrogateKind kind = SurrogateKind::gp;
  ParamBounds bounds;
  int restarts = 5;
  Eigen::MatrixXd domain_box;  // d x 2, used for virtual-point placement
  MonotoneOptions mono;
};

struct SurrogateImpl;

class GridEval;

// Immutable fitted metamodel. Copies share state; all queries are
// const and safe to run concurrently.
class Surrogate {
 public:
  Surrogate() = default;

  static Surrogate fit(const TrainingSet& data, const FitOptions& opts,
                       Rng& rng);
  // Re-estimates hyperparameters on new data, warm-started at the
  // current values.
  Surrogate refit(const TrainingSet& data, Rng& rng) const;
  // Assimilates one observation with hyperparameters frozen.
  Surrogate with_observation(const Eigen::VectorXd& x, double y,
                             double replication = 1.0) const;

  SurrogateKind kind() const;
  bool is_classifier() const;
  const KernelParams& params() const;
  const TrainingSet& data() const;
  Eigen::Index n() const;

  // Latent posterior (f-hat or z-hat) at a point.
  MeanSd at(const Eigen::VectorXd& x) const;
  double cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  // One-step-ahead posterior sd at x_star given a sample at cand.
  double lookahead_sd(const Eigen::VectorXd& x_star,
                      const Eigen::VectorXd& cand,
                      double noise_var = -1.0) const;

  // Classification cdf: Phi for Gaussian-flavored models, the Student-t
  // cdf with posterior dof for TP.
  double tail_cdf(double u) const;
  double band_quantile(double p) const;

  double noise_variance() const;  // fitted tau^2

  GridEval prepare_grid(const Eigen::MatrixXd& points) const;

  const SurrogateImpl& impl() const { return *impl_; }

 private:
  explicit Surrogate(std::shared_ptr<const SurrogateImpl> impl)
      : impl_(std::move(impl)) {}
  std::shared_ptr<const SurrogateImpl> impl_;
};

// Batched posterior caches over a fixed set of points: current mean/sd
// plus fast look-ahead sweeps used by the ICU criterion and metrics.
class GridEval {
 public:
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& sd() const { return sd_; }

  // Look-ahead sds at all grid points given a candidate.
  Eigen::VectorXd lookahead_sd(const Eigen::VectorXd& cand,
                               double noise_var = -1.0) const;

 private:
  friend class Surrogate;
  std::shared_ptr<const SurrogateImpl> impl_;
  Eigen::MatrixXd points_;
  Eigen::MatrixXd solved_;  // L_B^{-1} kvec per grid point, column-wise
  Eigen::VectorXd mean_, sd_;
};

}  // namespace lse
