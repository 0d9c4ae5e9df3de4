#pragma once

#include "lse/gp.hpp"
#include "lse/laplace.hpp"

namespace lse {

// Probit classification GP on signed responses, Laplace inference.
struct ClgpPosterior {
  KernelParams params;  // tau unused by the probit likelihood
  TrainingSet data;     // responses in {-1, +1}
  LaplaceState laplace;
  Eigen::MatrixXd chol_k;
  Eigen::VectorXd mode_weights;  // K^{-1} z~
  Eigen::MatrixXd chol_b;        // factor of K + V^{-1}

  Eigen::Index size() const { return data.size(); }
};

// Maps raw responses to signed labels; zero goes to +1.
Eigen::VectorXd sign_responses(const Eigen::VectorXd& y);

LaplaceState laplace_fit_clgp(const TrainingSet& signed_data,
                              const KernelParams& params);

ClgpPosterior make_clgp_posterior(const KernelParams& params,
                                  const TrainingSet& signed_data);

double clgp_laplace_evidence(const KernelParams& params,
                             const TrainingSet& signed_data);

ClgpPosterior fit_clgp(const TrainingSet& signed_data,
                       const ParamBounds& bounds, int restarts, Rng& rng,
                       const KernelParams* warm = nullptr);

Prediction predict_clgp(const ClgpPosterior& post,
                        const Eigen::MatrixXd& Xstar);
MeanSd predict_clgp_at(const ClgpPosterior& post, const Eigen::VectorXd& x);

// Posterior probability that x lies in the positive set,
// Phi(zhat / sqrt(1 + s^2)).
double clgp_class_probability(double zhat, double s);

}  // namespace lse
