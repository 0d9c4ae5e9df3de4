#pragma once

#include "lse/gp.hpp"
#include "lse/laplace.hpp"

namespace lse {

// GP regression with Student-t observation noise, fitted by Laplace
// approximation around the posterior mode.
struct TgpPosterior {
  KernelParams params;  // nu is the likelihood degrees of freedom
  TrainingSet data;
  LaplaceState laplace;
  Eigen::MatrixXd chol_k;        // factor of K + jitter
  Eigen::VectorXd mode_weights;  // K^{-1} mode
  Eigen::MatrixXd chol_b;        // factor of K + W~^{-1}

  Eigen::Index size() const { return data.size(); }
};

// Sum of log t_nu densities of the residuals y_i - f_i with scale
// tau / sqrt(r_i).
double tgp_log_likelihood(const Eigen::VectorXd& f, const TrainingSet& data,
                          const KernelParams& params);

LaplaceState laplace_fit_tgp(const TrainingSet& data,
                             const KernelParams& params);

TgpPosterior make_tgp_posterior(const KernelParams& params,
                                const TrainingSet& data);

// Laplace approximation of the log evidence; -inf when the Hessian
// determinant degenerates.
double tgp_laplace_evidence(const KernelParams& params,
                            const TrainingSet& data);

TgpPosterior fit_tgp(const TrainingSet& data, const ParamBounds& bounds,
                     int restarts, Rng& rng,
                     const KernelParams* warm = nullptr);

Prediction predict_tgp(const TgpPosterior& post, const Eigen::MatrixXd& Xstar);
MeanSd predict_tgp_at(const TgpPosterior& post, const Eigen::VectorXd& x);

}  // namespace lse
