#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace lse {

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lower-triangular Cholesky factor of A + jitter*I, escalating the
// jitter from 1e-8*scale2 by factors of 10 up to 1e-4*scale2.
// Throws FitError when the matrix stays non-PD.
Eigen::MatrixXd chol_with_jitter(Eigen::MatrixXd A, double scale2,
                                 double* jitter_used = nullptr);

// Solve L L^T x = b given the lower factor.
Eigen::VectorXd chol_solve(const Eigen::MatrixXd& L, Eigen::VectorXd b);
Eigen::MatrixXd chol_solve(const Eigen::MatrixXd& L, Eigen::MatrixXd B);

// log det(L L^T) = 2 sum log L_ii.
double chol_logdet(const Eigen::MatrixXd& L);

// Extend the factor of an (n x n) matrix to (n+1 x n+1) after appending
// the bordered row [b; c]. Throws FitError on a non-positive pivot.
Eigen::MatrixXd chol_append(const Eigen::MatrixXd& L, const Eigen::VectorXd& b,
                            double c);

}  // namespace lse
