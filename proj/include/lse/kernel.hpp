#pragma once

#include <Eigen/Core>
#include <optional>

namespace lse {

// Squared-exponential kernel hyperparameters. `tau` is the observation
// noise standard deviation (the scale parameter for t-observation
// likelihoods); `nu` is set only for the t-GP and TP models.
struct KernelParams {
  double sigma_se = 1.0;
  Eigen::VectorXd theta;
  double tau = 0.0;
  std::optional<double> nu;

  int dim() const { return static_cast<int>(theta.size()); }
  void validate() const;
};

struct TrainingSet {
  Eigen::MatrixXd inputs;       // n x d
  Eigen::VectorXd responses;    // batch means when replicated
  Eigen::VectorXd replication;  // r_i >= 1; empty means all ones

  Eigen::Index size() const { return inputs.rows(); }
  int dim() const { return static_cast<int>(inputs.cols()); }
  double replication_at(Eigen::Index i) const {
    return replication.size() ? replication[i] : 1.0;
  }
  TrainingSet appended(const Eigen::VectorXd& x, double y, double r = 1.0) const;
};

double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                 const KernelParams& p);

// K(X, X), symmetric with sigma_se^2 on the diagonal.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelParams& p);

// K(X, X2), rows index X.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& X2,
                             const KernelParams& p);

Eigen::VectorXd kernel_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& x,
                           const KernelParams& p);

// SE derivatives used by the monotone models.
// d/dx^j K(x, x2), d/dx2^j K(x, x2), and d^2/dx^j dx2^{j2} K(x, x2).
double se_kernel_dx(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                    int j, const KernelParams& p);
double se_kernel_dx2(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                     int j, const KernelParams& p);
double se_kernel_dxdx2(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                       int j, int j2, const KernelParams& p);

}  // namespace lse
