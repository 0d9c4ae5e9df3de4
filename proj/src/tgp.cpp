#include "lse/tgp.hpp"

#include <cmath>
#include <limits>

#include "lse/optim.hpp"
#include "lse/stats.hpp"

namespace lse {

namespace {

double scale_at(const KernelParams& p, const TrainingSet& data,
                Eigen::Index i) {
  return p.tau / std::sqrt(data.replication_at(i));
}

SiteLikelihood tgp_sites(const TrainingSet& data, const KernelParams& params) {
  SiteLikelihood lik;
  lik.loglik = [&data, &params](const Eigen::VectorXd& f) {
    return tgp_log_likelihood(f, data, params);
  };
  lik.grad_hess = [&data, &params](const Eigen::VectorXd& f,
                                   Eigen::VectorXd& g, Eigen::VectorXd& w) {
    const double nu = *params.nu;
    const Eigen::Index n = data.size();
    g.resize(n);
    w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ti = scale_at(params, data, i);
      const double r = data.responses[i] - f[i];
      const double denom = nu * ti * ti + r * r;
      g[i] = (nu + 1.0) * r / denom;
      w[i] = (nu + 1.0) * (nu * ti * ti - r * r) / (denom * denom);
    }
  };
  return lik;
}

Eigen::VectorXd gaussian_mean_init(const Eigen::MatrixXd& K,
                                   const KernelParams& params,
                                   const TrainingSet& data) {
  Eigen::MatrixXd C = K;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    C(i, i) += params.tau * params.tau / data.replication_at(i);
  const Eigen::MatrixXd L =
      chol_with_jitter(std::move(C), params.sigma_se * params.sigma_se);
  return K * chol_solve(L, data.responses);
}

}  // namespace

double tgp_log_likelihood(const Eigen::VectorXd& f, const TrainingSet& data,
                          const KernelParams& params) {
  const double nu = *params.nu;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    acc += stats::t_log_pdf_scaled(data.responses[i] - f[i], nu,
                                   scale_at(params, data, i));
  return acc;
}

LaplaceState laplace_fit_tgp(const TrainingSet& data,
                             const KernelParams& params) {
  Eigen::MatrixXd K = kernel_matrix(data.inputs, params);
  double jitter = 0.0;
  const Eigen::MatrixXd L =
      chol_with_jitter(K, params.sigma_se * params.sigma_se, &jitter);
  K.diagonal().array() += jitter;  // keep objective and factor consistent
  LaplaceState st =
      laplace_newton(K, L, tgp_sites(data, params),
                     gaussian_mean_init(K, params, data));
  if (!st.converged)
    throw FitError("laplace_fit_tgp: no convergence after " +
                   std::to_string(st.iterations) + " iterations");
  return st;
}

TgpPosterior make_tgp_posterior(const KernelParams& params,
                                const TrainingSet& data) {
  TgpPosterior post;
  post.params = params;
  post.data = data;
  Eigen::MatrixXd K = kernel_matrix(data.inputs, params);
  double jitter = 0.0;
  post.chol_k =
      chol_with_jitter(K, params.sigma_se * params.sigma_se, &jitter);
  K.diagonal().array() += jitter;
  post.laplace = laplace_newton(K, post.chol_k, tgp_sites(data, params),
                                gaussian_mean_init(K, params, data));
  if (!post.laplace.converged)
    throw FitError("make_tgp_posterior: Laplace mode search diverged");
  post.mode_weights = chol_solve(post.chol_k, post.laplace.mode);
  // Negative w_i are clamped so K + W~^{-1} stays PD.
  Eigen::MatrixXd B = K;
  for (Eigen::Index i = 0; i < data.size(); ++i)
    B(i, i) += 1.0 / std::max(post.laplace.hess_diag[i], 1e-6);
  post.chol_b = chol_with_jitter(std::move(B),
                                 params.sigma_se * params.sigma_se);
  return post;
}

double tgp_laplace_evidence(const KernelParams& params,
                            const TrainingSet& data) {
  Eigen::MatrixXd K = kernel_matrix(data.inputs, params);
  double jitter = 0.0;
  const Eigen::MatrixXd L =
      chol_with_jitter(K, params.sigma_se * params.sigma_se, &jitter);
  K.diagonal().array() += jitter;
  LaplaceState st = laplace_newton(K, L, tgp_sites(data, params),
                                   gaussian_mean_init(K, params, data));
  if (!st.converged) return -std::numeric_limits<double>::infinity();
  // log q = loglik(mode) - 0.5 mode' K^{-1} mode - 0.5 log det(I + K W)
  Eigen::MatrixXd A = K * st.hess_diag.asDiagonal();
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double det = lu.determinant();
  if (!(det > 0.0)) return -std::numeric_limits<double>::infinity();
  return tgp_log_likelihood(st.mode, data, params) -
         0.5 * st.mode.dot(chol_solve(L, st.mode)) - 0.5 * std::log(det);
}

TgpPosterior fit_tgp(const TrainingSet& data, const ParamBounds& bounds,
                     int restarts, Rng& rng, const KernelParams* warm) {
  if (data.size() < 2) throw FitError("fit_tgp: needs n >= 2");
  const int d = data.dim();
  const int np = d + 3;  // sigma, theta, tau, nu

  BoxTransform box;
  box.lo.resize(np);
  box.hi.resize(np);
  box.lo[0] = std::log(bounds.sigma_lo);
  box.hi[0] = std::log(bounds.sigma_hi);
  for (int k = 0; k < d; ++k) {
    box.lo[1 + k] = std::log(bounds.theta_lower(k));
    box.hi[1 + k] = std::log(bounds.theta_upper(k));
  }
  box.lo[1 + d] = std::log(bounds.tau_lo);
  box.hi[1 + d] = std::log(bounds.tau_hi);
  box.lo[2 + d] = std::log(bounds.nu_lo);
  box.hi[2 + d] = std::log(bounds.nu_hi);

  auto unpack = [&](const Eigen::VectorXd& logp) {
    KernelParams p;
    p.sigma_se = std::exp(logp[0]);
    p.theta = logp.segment(1, d).array().exp();
    p.tau = std::exp(logp[1 + d]);
    p.nu = std::exp(logp[2 + d]);
    return p;
  };

  auto value = [&](const Eigen::VectorXd& u) {
    try {
      return -tgp_laplace_evidence(unpack(box.to_bounded(u)), data);
    } catch (const FitError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  Objective obj = [&](const Eigen::VectorXd& u, Eigen::VectorXd* g) {
    const double f = value(u);
    if (g) {
      if (std::isfinite(f))
        *g = fd_gradient(value, u, 1e-4);
      else
        g->setZero(np);
    }
    return f;
  };

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_logp;
  LbfgsOptions lopts;
  lopts.max_iters = 60;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    Eigen::VectorXd logp0(np);
    if (r == 0 && warm) {
      logp0[0] = std::log(warm->sigma_se);
      for (int k = 0; k < d; ++k) logp0[1 + k] = std::log(warm->theta[k]);
      logp0[1 + d] = std::log(std::max(warm->tau, bounds.tau_lo));
      logp0[2 + d] = std::log(warm->nu.value_or(5.0));
      logp0 = logp0.cwiseMax(box.lo).cwiseMin(box.hi);
    } else if (r == 0) {
      logp0 = 0.5 * (box.lo + box.hi);
      logp0[2 + d] = std::log(std::min(5.0, bounds.nu_hi));  // heavy-tail start
    } else {
      for (int i = 0; i < np; ++i)
        logp0[i] = rng.uniform(box.lo[i], box.hi[i]);
    }
    LbfgsResult res = lbfgs_minimize(obj, box.to_unbounded(logp0), lopts);
    if (res.fx < best) {
      best = res.fx;
      best_logp = box.to_bounded(res.x);
    }
  }
  if (!std::isfinite(best)) throw FitError("fit_tgp: all starts failed");
  return make_tgp_posterior(unpack(best_logp), data);
}

Prediction predict_tgp(const TgpPosterior& post,
                       const Eigen::MatrixXd& Xstar) {
  Prediction out;
  const Eigen::MatrixXd Ks =
      cross_kernel(post.data.inputs, Xstar, post.params);
  out.mean = Ks.transpose() * post.mode_weights;
  Eigen::MatrixXd V = Ks;
  post.chol_b.triangularView<Eigen::Lower>().solveInPlace(V);
  out.cov = kernel_matrix(Xstar, post.params) - V.transpose() * V;
  return out;
}

MeanSd predict_tgp_at(const TgpPosterior& post, const Eigen::VectorXd& x) {
  const Eigen::VectorXd k = kernel_row(post.data.inputs, x, post.params);
  Eigen::VectorXd v = k;
  post.chol_b.triangularView<Eigen::Lower>().solveInPlace(v);
  const double var = std::max(
      post.params.sigma_se * post.params.sigma_se - v.squaredNorm(), 0.0);
  return {k.dot(post.mode_weights), std::sqrt(var)};
}

}  // namespace lse
