#include "lse/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace lse {

void KernelParams::validate() const {
  if (!(sigma_se > 0.0)) throw std::invalid_argument("sigma_se must be > 0");
  if (theta.size() == 0) throw std::invalid_argument("theta is empty");
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (!(theta[i] > 0.0)) throw std::invalid_argument("theta must be > 0");
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
  if (nu && !(*nu > 2.0)) throw std::invalid_argument("nu must be > 2");
}

TrainingSet TrainingSet::appended(const Eigen::VectorXd& x, double y,
                                  double r) const {
  TrainingSet out;
  const Eigen::Index n = size();
  out.inputs.resize(n + 1, inputs.cols());
  out.inputs.topRows(n) = inputs;
  out.inputs.row(n) = x.transpose();
  out.responses.resize(n + 1);
  out.responses.head(n) = responses;
  out.responses[n] = y;
  if (replication.size() || r != 1.0) {
    out.replication = Eigen::VectorXd::Ones(n + 1);
    if (replication.size()) out.replication.head(n) = replication;
    out.replication[n] = r;
  }
  return out;
}

namespace {

inline double sq_dist(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                      const Eigen::VectorXd& theta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double d = (x[i] - x2[i]) / theta[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                 const KernelParams& p) {
  if (x.size() != p.theta.size() || x2.size() != p.theta.size())
    throw std::invalid_argument("se_kernel: dimension mismatch");
  return p.sigma_se * p.sigma_se * std::exp(-0.5 * sq_dist(x, x2, p.theta));
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X,
                              const KernelParams& p) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  const double s2 = p.sigma_se * p.sigma_se;
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = s2;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (Eigen::Index k = 0; k < X.cols(); ++k) {
        const double u = (X(i, k) - X(j, k)) / p.theta[k];
        d += u * u;
      }
      K(i, j) = K(j, i) = s2 * std::exp(-0.5 * d);
    }
  }
  return K;
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& X,
                             const Eigen::MatrixXd& X2,
                             const KernelParams& p) {
  Eigen::MatrixXd K(X.rows(), X2.rows());
  const double s2 = p.sigma_se * p.sigma_se;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X2.rows(); ++j) {
      double d = 0.0;
      for (Eigen::Index k = 0; k < X.cols(); ++k) {
        const double u = (X(i, k) - X2(j, k)) / p.theta[k];
        d += u * u;
      }
      K(i, j) = s2 * std::exp(-0.5 * d);
    }
  return K;
}

Eigen::VectorXd kernel_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& x,
                           const KernelParams& p) {
  Eigen::VectorXd k(X.rows());
  const double s2 = p.sigma_se * p.sigma_se;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double u = (X(i, j) - x[j]) / p.theta[j];
      d += u * u;
    }
    k[i] = s2 * std::exp(-0.5 * d);
  }
  return k;
}

double se_kernel_dx(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                    int j, const KernelParams& p) {
  const double k = se_kernel(x, x2, p);
  return -k * (x[j] - x2[j]) / (p.theta[j] * p.theta[j]);
}

double se_kernel_dx2(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                     int j, const KernelParams& p) {
  return -se_kernel_dx(x, x2, j, p);
}

double se_kernel_dxdx2(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
                       int j, int j2, const KernelParams& p) {
  const double k = se_kernel(x, x2, p);
  const double tj = p.theta[j] * p.theta[j];
  const double tj2 = p.theta[j2] * p.theta[j2];
  const double delta = j == j2 ? 1.0 / tj : 0.0;
  return k * (delta - (x[j] - x2[j]) * (x[j2] - x2[j2]) / (tj * tj2));
}

}  // namespace lse
