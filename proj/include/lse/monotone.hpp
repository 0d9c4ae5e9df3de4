#pragma once

#include <vector>

#include "lse/gp.hpp"

namespace lse {

// One virtual derivative observation: the latent gradient along
// `coordinate` at `location` is pushed toward the sign `direction`
// through the probit factor Phi(direction * df/dx^j / eta).
struct VirtualDerivObs {
  Eigen::VectorXd location;
  int coordinate = 0;
  int direction = +1;
  double eta = 1e-6;
};

struct EPSites {
  Eigen::VectorXd mu_tilde;
  Eigen::VectorXd sigma2_tilde;
  bool converged = false;
  int sweeps = 0;
};

struct MonotoneOptions {
  std::vector<int> directions;  // per coordinate: +1, -1, or 0 (free)
  double eta = 1e-6;            // scaled by the response range at fit time
  int budget_per_dim = 10;
  int candidate_grid = 32;      // per axis, capped at two axes
  double damping = 0.8;
  int max_sweeps = 200;
  double tol = 1e-6;
};

// Joint state over [gradient-at-virtual-points block; f block]. The
// derivative block comes first so that appending a data point touches
// only the trailing row of the factor.
struct MonotonePosterior {
  KernelParams params;
  TrainingSet data;  // signed responses when classify is set
  bool classify = false;
  std::vector<VirtualDerivObs> virtuals;
  std::vector<int> directions;
  EPSites sites;          // virtual sites, then (for MCl-GP) response sites
  Eigen::MatrixXd chol_b;  // factor of K_joint + Sigma~_joint
  Eigen::VectorXd mean_w;  // (K_joint + Sigma~_joint)^{-1} mu~_joint

  Eigen::Index n_virtual() const {
    return static_cast<Eigen::Index>(virtuals.size());
  }
};

// Joint prior covariance over the derivative and f blocks, assembled
// from the analytic SE derivatives.
Eigen::MatrixXd joint_kernel(const Eigen::MatrixXd& X,
                             const std::vector<VirtualDerivObs>& virtuals,
                             const KernelParams& params);

// Cross-covariance of f(x) against [derivative block; f block].
Eigen::VectorXd monotone_kvec(const MonotonePosterior& post,
                              const Eigen::VectorXd& x);

// EP fixed point for the probit factors; for MCl-GP the response block
// is handled by probit sites as well.
MonotonePosterior ep_fit_monotone(const TrainingSet& data,
                                  const std::vector<VirtualDerivObs>& virtuals,
                                  const KernelParams& params, bool classify,
                                  const std::vector<int>& directions,
                                  const MonotoneOptions& opts = {});

Prediction predict_monotone(const MonotonePosterior& post,
                            const Eigen::MatrixXd& Xstar);
MeanSd predict_monotone_at(const MonotonePosterior& post,
                           const Eigen::VectorXd& x);

// Posterior mean and sd of the gradient along one coordinate.
MeanSd predict_monotone_gradient(const MonotonePosterior& post,
                                 const Eigen::VectorXd& x, int coordinate);

// Greedy placement at the candidates with the largest probability of
// constraint violation; never duplicates a (location, coordinate) pair.
std::vector<VirtualDerivObs> place_virtual_points(
    const MonotonePosterior& post, const Eigen::MatrixXd& box, int budget,
    const MonotoneOptions& opts);

// One-step-ahead variance with the virtual sites frozen, so the
// update takes the exact Gaussian form.
Eigen::VectorXd lookahead_var_monotone(const MonotonePosterior& post,
                                       const Eigen::VectorXd& x_new,
                                       const Eigen::MatrixXd& Xstar,
                                       double noise_var = -1.0);

// Update with one observation, keeping hyperparameters, virtual points,
// and EP sites frozen.
MonotonePosterior monotone_with_observation(const MonotonePosterior& post,
                                            const Eigen::VectorXd& x,
                                            double y, double replication);

}  // namespace lse
