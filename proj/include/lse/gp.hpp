#pragma once

#include <Eigen/Dense>

#include "lse/kernel.hpp"
#include "lse/linalg.hpp"
#include "lse/rng.hpp"

namespace lse {

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

// Hyperparameter search box for ML fitting. Lengthscale bounds follow
// the [0.3, 2] rule per unit of input-box width.
struct ParamBounds {
  double sigma_lo = 1e-3, sigma_hi = 10.0;
  double theta_lo = 0.3, theta_hi = 2.0;
  Eigen::VectorXd theta_lo_dim, theta_hi_dim;  // optional per-dimension
  double tau_lo = 1e-3, tau_hi = 2.0;
  double nu_lo = 2.1, nu_hi = 50.0;

  static ParamBounds for_data(const TrainingSet& data,
                              const Eigen::VectorXd& box_widths);
  double theta_lower(int i) const {
    return theta_lo_dim.size() ? theta_lo_dim[i] : theta_lo;
  }
  double theta_upper(int i) const {
    return theta_hi_dim.size() ? theta_hi_dim[i] : theta_hi;
  }
};

// Gaussian-observation GP posterior with cached Cholesky factor of
// K + diag(tau^2 / r) and alpha = (K + tau^2/r I)^{-1} y.
struct GaussianPosterior {
  KernelParams params;
  TrainingSet data;
  Eigen::MatrixXd chol;   // lower factor
  Eigen::VectorXd alpha;
  double jitter = 0.0;

  Eigen::Index size() const { return data.size(); }
};

GaussianPosterior make_gaussian_posterior(const KernelParams& params,
                                          const TrainingSet& data);

// log N(y; 0, K + tau^2/r I). Throws FitError when not PD after jitter.
double log_marginal_likelihood(const KernelParams& params,
                               const TrainingSet& data);

// Same value plus the gradient with respect to
// (log sigma_se, log theta_1..d, log tau).
double log_marginal_likelihood_grad(const KernelParams& params,
                                    const TrainingSet& data,
                                    Eigen::VectorXd* grad);

// Multi-start ML fit over (sigma_se, theta, tau).
GaussianPosterior fit_gaussian_gp(const TrainingSet& data,
                                  const ParamBounds& bounds, int restarts,
                                  Rng& rng,
                                  const KernelParams* warm = nullptr);

Prediction predict_gaussian(const GaussianPosterior& post,
                            const Eigen::MatrixXd& Xstar);
MeanSd predict_gaussian_at(const GaussianPosterior& post,
                           const Eigen::VectorXd& x);

// Exact O(n^2) posterior update with a new observation; hyperparameters
// are kept fixed. Equivalent to a from-scratch rebuild.
GaussianPosterior update_gaussian(const GaussianPosterior& post,
                                  const Eigen::VectorXd& x_new, double y_new,
                                  double replication = 1.0);

}  // namespace lse
