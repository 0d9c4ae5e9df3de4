#pragma once

#include "lse/clgp.hpp"
#include "lse/gp.hpp"
#include "lse/tgp.hpp"
#include "lse/tp.hpp"

namespace lse {

// Quadratic form of the bordered-matrix inverse,
// [b^T d] [[A b];[b^T c]]^{-1} [b; d]
//   = b^T A^{-1} b - (d - b^T A^{-1} b)^2 / (c - b^T A^{-1} b).
double woodbury_quadform(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         double c, double d);

struct LookaheadQuery {
  Eigen::VectorXd candidate;  // x_{n+1}
  Eigen::MatrixXd targets;    // m x d
};

// One-step-ahead posterior variances at the targets, conditional on
// sampling at the candidate. `noise_var` overrides tau^2 (e.g. tau^2/r
// for batched designs); pass a negative value to use the fitted tau^2.
Eigen::VectorXd lookahead_var_gaussian(const GaussianPosterior& post,
                                       const LookaheadQuery& q,
                                       double noise_var = -1.0);

Eigen::VectorXd lookahead_var_tgp(const TgpPosterior& post,
                                  const LookaheadQuery& q,
                                  double noise_var = -1.0);

Eigen::VectorXd lookahead_var_clgp(const ClgpPosterior& post,
                                   const LookaheadQuery& q);

Eigen::VectorXd lookahead_var_tp(const TPosterior& tp,
                                 const LookaheadQuery& q,
                                 double noise_var = -1.0);

// Expected probit-likelihood curvature at the candidate,
// v+ p+ + v- p-, evaluated from the current classification posterior.
double clgp_expected_curvature(double zhat, double s);

}  // namespace lse
