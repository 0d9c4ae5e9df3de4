#include "lse/linalg.hpp"

#include <cmath>

namespace lse {

Eigen::MatrixXd chol_with_jitter(Eigen::MatrixXd A, double scale2,
                                 double* jitter_used) {
  double jitter = 1e-8 * scale2;
  const double max_jitter = 1e-4 * scale2;
  const Eigen::MatrixXd base = A;
  for (;;) {
    A = base;
    A.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      if (jitter_used) *jitter_used = jitter;
      return llt.matrixL();
    }
    if (jitter >= max_jitter)
      throw FitError("cholesky failed at maximum jitter");
    jitter *= 10.0;
  }
}

Eigen::VectorXd chol_solve(const Eigen::MatrixXd& L, Eigen::VectorXd b) {
  L.triangularView<Eigen::Lower>().solveInPlace(b);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(b);
  return b;
}

Eigen::MatrixXd chol_solve(const Eigen::MatrixXd& L, Eigen::MatrixXd B) {
  L.triangularView<Eigen::Lower>().solveInPlace(B);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(B);
  return B;
}

double chol_logdet(const Eigen::MatrixXd& L) {
  return 2.0 * L.diagonal().array().log().sum();
}

Eigen::MatrixXd chol_append(const Eigen::MatrixXd& L, const Eigen::VectorXd& b,
                            double c) {
  const Eigen::Index n = L.rows();
  Eigen::VectorXd l = b;
  L.triangularView<Eigen::Lower>().solveInPlace(l);
  const double d2 = c - l.squaredNorm();
  if (!(d2 > 0.0)) throw FitError("chol_append: non-positive pivot");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + 1, n + 1);
  out.topLeftCorner(n, n) = L;
  out.row(n).head(n) = l.transpose();
  out(n, n) = std::sqrt(d2);
  return out;
}

}  // namespace lse
