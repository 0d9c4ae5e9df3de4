#pragma once

#include "lse/gp.hpp"

namespace lse {

// Student-t process with noise folded into the kernel. Shares the GP
// posterior mean; the covariance carries the data-dependent inflation
// factor (nu + beta - 2) / (nu + n - 2).
struct TPosterior {
  KernelParams params;  // nu is the process degrees of freedom
  TrainingSet data;
  Eigen::MatrixXd chol;  // factor of K + tau^2/r I + jitter
  Eigen::VectorXd alpha;
  double beta = 0.0;  // y^T (K + tau^2 I)^{-1} y

  Eigen::Index size() const { return data.size(); }
  double cov_factor() const {
    return (*params.nu + beta - 2.0) /
           (*params.nu + static_cast<double>(data.size()) - 2.0);
  }
  double predictive_dof() const {
    return *params.nu + static_cast<double>(data.size());
  }
};

struct TpPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double dof = 0.0;
};

double tp_log_marginal_likelihood(const KernelParams& params,
                                  const TrainingSet& data);

TPosterior make_tp_posterior(const KernelParams& params,
                             const TrainingSet& data);

TPosterior fit_tp(const TrainingSet& data, const ParamBounds& bounds,
                  int restarts, Rng& rng,
                  const KernelParams* warm = nullptr);

TpPrediction predict_tp(const TPosterior& tp, const Eigen::MatrixXd& Xstar);
MeanSd predict_tp_at(const TPosterior& tp, const Eigen::VectorXd& x);

}  // namespace lse
