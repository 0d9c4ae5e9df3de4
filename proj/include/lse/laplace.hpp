#pragma once

#include <Eigen/Dense>
#include <functional>

namespace lse {

// Mode and curvature of a latent-Gaussian posterior with a factorizing
// likelihood, found by damped Newton with line search on
// psi(f) = loglik(f) - 0.5 f^T K^{-1} f.
struct LaplaceState {
  Eigen::VectorXd mode;
  Eigen::VectorXd hess_diag;  // W_ii = -d^2 loglik / df_i^2 at the mode
  bool converged = false;
  int iterations = 0;
};

struct SiteLikelihood {
  std::function<double(const Eigen::VectorXd&)> loglik;
  // fills gradient and W (negative second derivative), both length n
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                     Eigen::VectorXd&)>
      grad_hess;
};

LaplaceState laplace_newton(const Eigen::MatrixXd& K,
                            const Eigen::MatrixXd& chol_k,
                            const SiteLikelihood& lik, Eigen::VectorXd f0,
                            int max_iters = 100, double tol = 1e-6);

}  // namespace lse
