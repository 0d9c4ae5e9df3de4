#pragma once

#include <Eigen/Core>
#include <functional>

namespace lse {

// Objective callback: returns f(x) and fills grad when non-null.
using Objective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct LbfgsOptions {
  int max_iters = 120;
  double grad_tol = 1e-6;
  int history = 8;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int iters = 0;
  bool converged = false;
};

// Unconstrained L-BFGS with Armijo backtracking. Minimizes fn.
LbfgsResult lbfgs_minimize(const Objective& fn, Eigen::VectorXd x0,
                           const LbfgsOptions& opts = {});

// Box-bound transform: x = lo + (hi - lo) * sigmoid(u). Maps an
// unconstrained optimizer onto a bounded problem.
struct BoxTransform {
  Eigen::VectorXd lo, hi;

  Eigen::VectorXd to_bounded(const Eigen::VectorXd& u) const;
  Eigen::VectorXd to_unbounded(const Eigen::VectorXd& x) const;
  // d bounded / d u, elementwise.
  Eigen::VectorXd jacobian_diag(const Eigen::VectorXd& u) const;
};

// Central finite-difference gradient of a scalar function.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                            const Eigen::VectorXd& x, double h = 1e-5);

}  // namespace lse
