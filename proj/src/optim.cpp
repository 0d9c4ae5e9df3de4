#include "lse/optim.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace lse {

LbfgsResult lbfgs_minimize(const Objective& fn, Eigen::VectorXd x0,
                           const LbfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = std::move(x0), grad(n);
  double fx = fn(x, &grad);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  LbfgsResult res;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double dg = dir.dot(grad);
    if (!(dg < 0.0)) {  // fall back to steepest descent
      dir = -grad;
      dg = -grad.squaredNorm();
    }

    // Armijo backtracking.
    double step = 1.0;
    const double c1 = 1e-4;
    Eigen::VectorXd x_new(n), grad_new(n);
    double fx_new = std::numeric_limits<double>::infinity();
    bool ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * dir;
      fx_new = fn(x_new, &grad_new);
      if (std::isfinite(fx_new) && fx_new <= fx + c1 * step * dg) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) break;

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double f_change = std::fabs(fx - fx_new);
    x = std::move(x_new);
    fx = fx_new;
    grad = std::move(grad_new);
    if (f_change < 1e-12 * (1.0 + std::fabs(fx))) {
      res.converged = true;
      ++it;
      break;
    }
  }
  res.x = std::move(x);
  res.fx = fx;
  res.iters = it;
  return res;
}

Eigen::VectorXd BoxTransform::to_bounded(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-u[i]));
    x[i] = lo[i] + (hi[i] - lo[i]) * s;
  }
  return x;
}

Eigen::VectorXd BoxTransform::to_unbounded(const Eigen::VectorXd& x) const {
  Eigen::VectorXd u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double t = (x[i] - lo[i]) / (hi[i] - lo[i]);
    t = std::min(std::max(t, 1e-9), 1.0 - 1e-9);
    u[i] = std::log(t / (1.0 - t));
  }
  return u;
}

Eigen::VectorXd BoxTransform::jacobian_diag(const Eigen::VectorXd& u) const {
  Eigen::VectorXd j(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double s = 1.0 / (1.0 + std::exp(-u[i]));
    j[i] = (hi[i] - lo[i]) * s * (1.0 - s);
  }
  return j;
}

Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size()), xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = h * (1.0 + std::fabs(x[i]));
    xp[i] = x[i] + hi;
    const double fp = fn(xp);
    xp[i] = x[i] - hi;
    const double fm = fn(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * hi);
  }
  return g;
}

}  // namespace lse
