#include "lse/clgp.hpp"

#include <cmath>
#include <limits>

#include "lse/optim.hpp"
#include "lse/stats.hpp"

namespace lse {

namespace {

// phi(u)/Phi(u), with the asymptotic tail for very negative u.
double mills(double u) {
  if (u < -30.0) return -u - 1.0 / u + 2.0 / (u * u * u);
  return stats::norm_pdf(u) / stats::norm_cdf(u);
}

double log_norm_cdf(double u) {
  if (u < -30.0)
    return -0.5 * u * u - std::log(-u) - 0.5 * std::log(2.0 * M_PI);
  return std::log(stats::norm_cdf(u));
}

SiteLikelihood clgp_sites(const TrainingSet& data) {
  SiteLikelihood lik;
  lik.loglik = [&data](const Eigen::VectorXd& z) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i)
      acc += log_norm_cdf(data.responses[i] * z[i]);
    return acc;
  };
  lik.grad_hess = [&data](const Eigen::VectorXd& z, Eigen::VectorXd& g,
                          Eigen::VectorXd& w) {
    const Eigen::Index n = data.size();
    g.resize(n);
    w.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = data.responses[i];
      const double m = mills(y * z[i]);
      g[i] = y * m;
      w[i] = m * m + y * z[i] * m;
    }
  };
  return lik;
}

}  // namespace

Eigen::VectorXd sign_responses(const Eigen::VectorXd& y) {
  Eigen::VectorXd s(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) s[i] = y[i] < 0.0 ? -1.0 : 1.0;
  return s;
}

LaplaceState laplace_fit_clgp(const TrainingSet& signed_data,
                              const KernelParams& params) {
  for (Eigen::Index i = 0; i < signed_data.size(); ++i)
    if (signed_data.responses[i] != 1.0 && signed_data.responses[i] != -1.0)
      throw std::invalid_argument("laplace_fit_clgp: responses must be +/-1");
  Eigen::MatrixXd K = kernel_matrix(signed_data.inputs, params);
  double jitter = 0.0;
  const Eigen::MatrixXd L =
      chol_with_jitter(K, params.sigma_se * params.sigma_se, &jitter);
  K.diagonal().array() += jitter;
  LaplaceState st =
      laplace_newton(K, L, clgp_sites(signed_data),
                     Eigen::VectorXd::Zero(signed_data.size()));
  if (!st.converged) throw FitError("laplace_fit_clgp: no convergence");
  return st;
}

ClgpPosterior make_clgp_posterior(const KernelParams& params,
                                  const TrainingSet& signed_data) {
  ClgpPosterior post;
  post.params = params;
  post.data = signed_data;
  Eigen::MatrixXd K = kernel_matrix(signed_data.inputs, params);
  double jitter = 0.0;
  post.chol_k =
      chol_with_jitter(K, params.sigma_se * params.sigma_se, &jitter);
  K.diagonal().array() += jitter;
  post.laplace =
      laplace_newton(K, post.chol_k, clgp_sites(signed_data),
                     Eigen::VectorXd::Zero(signed_data.size()));
  if (!post.laplace.converged)
    throw FitError("make_clgp_posterior: Laplace mode search diverged");
  post.mode_weights = chol_solve(post.chol_k, post.laplace.mode);
  Eigen::MatrixXd B = K;
  for (Eigen::Index i = 0; i < signed_data.size(); ++i)
    B(i, i) += 1.0 / std::max(post.laplace.hess_diag[i], 1e-12);
  post.chol_b =
      chol_with_jitter(std::move(B), params.sigma_se * params.sigma_se);
  return post;
}

double clgp_laplace_evidence(const KernelParams& params,
                             const TrainingSet& signed_data) {
  Eigen::MatrixXd K = kernel_matrix(signed_data.inputs, params);
  double jitter = 0.0;
  const Eigen::MatrixXd L =
      chol_with_jitter(K, params.sigma_se * params.sigma_se, &jitter);
  K.diagonal().array() += jitter;
  SiteLikelihood lik = clgp_sites(signed_data);
  LaplaceState st = laplace_newton(K, L, lik,
                                   Eigen::VectorXd::Zero(signed_data.size()));
  if (!st.converged) return -std::numeric_limits<double>::infinity();
  // V >= 0 for probit, so log|I + KV| via the symmetrized factor.
  const Eigen::VectorXd sw = st.hess_diag.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd B = sw.asDiagonal() * K * sw.asDiagonal();
  B.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();
  const double logdet =
      2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return lik.loglik(st.mode) - 0.5 * st.mode.dot(chol_solve(L, st.mode)) -
         0.5 * logdet;
}

ClgpPosterior fit_clgp(const TrainingSet& signed_data,
                       const ParamBounds& bounds, int restarts, Rng& rng,
                       const KernelParams* warm) {
  if (signed_data.size() < 2) throw FitError("fit_clgp: needs n >= 2");
  const int d = signed_data.dim();
  const int np = d + 1;  // sigma, theta; probit has no noise parameter

  BoxTransform box;
  box.lo.resize(np);
  box.hi.resize(np);
  // The latent scale is identified only through the probit link; allow a
  // wider band than the response-scaled regression bounds.
  box.lo[0] = std::log(0.1);
  box.hi[0] = std::log(20.0);
  for (int k = 0; k < d; ++k) {
    box.lo[1 + k] = std::log(bounds.theta_lower(k));
    box.hi[1 + k] = std::log(bounds.theta_upper(k));
  }

  auto unpack = [&](const Eigen::VectorXd& logp) {
    KernelParams p;
    p.sigma_se = std::exp(logp[0]);
    p.theta = logp.segment(1, d).array().exp();
    p.tau = 0.0;
    return p;
  };
  auto value = [&](const Eigen::VectorXd& u) {
    try {
      return -clgp_laplace_evidence(unpack(box.to_bounded(u)), signed_data);
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
      logp0 = logp0.cwiseMax(box.lo).cwiseMin(box.hi);
    } else if (r == 0)
      logp0 = 0.5 * (box.lo + box.hi);
    else
      for (int i = 0; i < np; ++i)
        logp0[i] = rng.uniform(box.lo[i], box.hi[i]);
    LbfgsResult res = lbfgs_minimize(obj, box.to_unbounded(logp0), lopts);
    if (res.fx < best) {
      best = res.fx;
      best_logp = box.to_bounded(res.x);
    }
  }
  if (!std::isfinite(best)) throw FitError("fit_clgp: all starts failed");
  return make_clgp_posterior(unpack(best_logp), signed_data);
}

Prediction predict_clgp(const ClgpPosterior& post,
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

MeanSd predict_clgp_at(const ClgpPosterior& post, const Eigen::VectorXd& x) {
  const Eigen::VectorXd k = kernel_row(post.data.inputs, x, post.params);
  Eigen::VectorXd v = k;
  post.chol_b.triangularView<Eigen::Lower>().solveInPlace(v);
  const double var = std::max(
      post.params.sigma_se * post.params.sigma_se - v.squaredNorm(), 0.0);
  return {k.dot(post.mode_weights), std::sqrt(var)};
}

double clgp_class_probability(double zhat, double s) {
  if (s < 0.0) throw std::invalid_argument("clgp_class_probability: s < 0");
  return stats::norm_cdf(zhat / std::sqrt(1.0 + s * s));
}

}  // namespace lse
