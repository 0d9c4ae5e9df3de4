#include "lse/laplace.hpp"

#include <cmath>

#include "lse/linalg.hpp"

namespace lse {

LaplaceState laplace_newton(const Eigen::MatrixXd& K,
                            const Eigen::MatrixXd& chol_k,
                            const SiteLikelihood& lik, Eigen::VectorXd f0,
                            int max_iters, double tol) {
  const Eigen::Index n = K.rows();
  LaplaceState st;
  Eigen::VectorXd f = std::move(f0);
  Eigen::VectorXd grad_l(n), w(n);

  auto kinv = [&](const Eigen::VectorXd& v) { return chol_solve(chol_k, v); };
  auto psi = [&](const Eigen::VectorXd& fv) {
    return lik.loglik(fv) - 0.5 * fv.dot(kinv(fv));
  };

  double cur = psi(f);
  int it = 0;
  for (; it < max_iters; ++it) {
    lik.grad_hess(f, grad_l, w);
    const Eigen::VectorXd g = grad_l - kinv(f);
    if (g.lpNorm<Eigen::Infinity>() < tol) {
      st.converged = true;
      break;
    }
    // Newton system (K^{-1} + W~) delta = g, W~ clamped to keep it SPD.
    Eigen::VectorXd wc = w.cwiseMax(1e-6);
    Eigen::MatrixXd A = K * wc.asDiagonal();
    A.diagonal().array() += 1.0;
    Eigen::VectorXd delta = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(
        Eigen::VectorXd(K * g));

    // backtracking ascent; g.delta >= 0 because the system is SPD
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Eigen::VectorXd cand = f + step * delta;
      const double val = psi(cand);
      if (std::isfinite(val) &&
          (val >= cur + 1e-4 * step * g.dot(delta) || val >= cur)) {
        f = cand;
        cur = val;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  lik.grad_hess(f, grad_l, w);
  if (!st.converged)
    st.converged =
        (grad_l - kinv(f)).lpNorm<Eigen::Infinity>() < tol;
  st.mode = std::move(f);
  st.hess_diag = std::move(w);
  st.iterations = it;
  return st;
}

}  // namespace lse
