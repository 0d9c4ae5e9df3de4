#include "lse/gp.hpp"

#include <cmath>
#include <limits>

#include "lse/optim.hpp"

namespace lse {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

Eigen::VectorXd noise_diag(const KernelParams& params,
                           const TrainingSet& data) {
  const Eigen::Index n = data.size();
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d[i] = params.tau * params.tau / data.replication_at(i);
  return d;
}

}  // namespace

ParamBounds ParamBounds::for_data(const TrainingSet& data,
                                  const Eigen::VectorXd& box_widths) {
  ParamBounds b;
  const Eigen::Index n = data.size();
  double mean = data.responses.mean();
  double var = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = data.responses[i] - mean;
    var += r * r;
  }
  var = n > 1 ? var / static_cast<double>(n - 1) : 1.0;
  const double ys = std::max(std::sqrt(var), 1e-6);
  b.sigma_lo = 0.05 * ys;
  b.sigma_hi = 20.0 * ys;
  b.tau_lo = 1e-3 * ys;
  b.tau_hi = 10.0 * ys;
  b.theta_lo_dim = 0.3 * box_widths;
  b.theta_hi_dim = 2.0 * box_widths;
  return b;
}

GaussianPosterior make_gaussian_posterior(const KernelParams& params,
                                          const TrainingSet& data) {
  GaussianPosterior post;
  post.params = params;
  post.data = data;
  Eigen::MatrixXd C = kernel_matrix(data.inputs, params);
  C.diagonal() += noise_diag(params, data);
  post.chol =
      chol_with_jitter(std::move(C), params.sigma_se * params.sigma_se,
                       &post.jitter);
  post.alpha = chol_solve(post.chol, data.responses);
  return post;
}

double log_marginal_likelihood(const KernelParams& params,
                               const TrainingSet& data) {
  const Eigen::Index n = data.size();
  Eigen::MatrixXd C = kernel_matrix(data.inputs, params);
  C.diagonal() += noise_diag(params, data);
  const Eigen::MatrixXd L =
      chol_with_jitter(std::move(C), params.sigma_se * params.sigma_se);
  const Eigen::VectorXd alpha = chol_solve(L, data.responses);
  return -0.5 * data.responses.dot(alpha) - 0.5 * chol_logdet(L) -
         0.5 * static_cast<double>(n) * kLog2Pi;
}

double log_marginal_likelihood_grad(const KernelParams& params,
                                    const TrainingSet& data,
                                    Eigen::VectorXd* grad) {
  const Eigen::Index n = data.size();
  const int d = params.dim();
  Eigen::MatrixXd K = kernel_matrix(data.inputs, params);
  Eigen::MatrixXd C = K;
  C.diagonal() += noise_diag(params, data);
  const Eigen::MatrixXd L =
      chol_with_jitter(std::move(C), params.sigma_se * params.sigma_se);
  const Eigen::VectorXd alpha = chol_solve(L, data.responses);
  const double lml = -0.5 * data.responses.dot(alpha) - 0.5 * chol_logdet(L) -
                     0.5 * static_cast<double>(n) * kLog2Pi;
  if (!grad) return lml;

  // dLML/dp = 0.5 tr((alpha alpha^T - C^{-1}) dC/dp)
  Eigen::MatrixXd Cinv =
      chol_solve(L, Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
  Eigen::MatrixXd M = alpha * alpha.transpose() - Cinv;

  grad->resize(d + 2);
  // log sigma_se: dK = 2K
  (*grad)[0] = (M.array() * K.array()).sum();
  // log theta_k: dK_ij = K_ij * (x_ik - x_jk)^2 / theta_k^2
  for (int k = 0; k < d; ++k) {
    double acc = 0.0;
    const double t2 = params.theta[k] * params.theta[k];
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const double diff = data.inputs(i, k) - data.inputs(j, k);
        acc += M(i, j) * K(i, j) * diff * diff / t2;
      }
    (*grad)[1 + k] = 0.5 * acc;
  }
  // log tau: dC = diag(2 tau^2 / r)
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    acc += M(i, i) * params.tau * params.tau / data.replication_at(i);
  (*grad)[1 + d] = acc;
  return lml;
}

GaussianPosterior fit_gaussian_gp(const TrainingSet& data,
                                  const ParamBounds& bounds, int restarts,
                                  Rng& rng, const KernelParams* warm) {
  if (data.size() < 2) throw FitError("fit_gaussian_gp: needs n >= 2");
  const int d = data.dim();
  const int np = d + 2;

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

  auto unpack = [&](const Eigen::VectorXd& logp) {
    KernelParams p;
    p.sigma_se = std::exp(logp[0]);
    p.theta = logp.segment(1, d).array().exp();
    p.tau = std::exp(logp[1 + d]);
    return p;
  };

  // Minimize the negative LML in the unconstrained coordinates.
  Objective obj = [&](const Eigen::VectorXd& u, Eigen::VectorXd* g) {
    const Eigen::VectorXd logp = box.to_bounded(u);
    const KernelParams p = unpack(logp);
    try {
      if (!g) return -log_marginal_likelihood(p, data);
      Eigen::VectorXd glog;
      const double lml = log_marginal_likelihood_grad(p, data, &glog);
      *g = -(glog.array() * box.jacobian_diag(u).array()).matrix();
      return -lml;
    } catch (const FitError&) {
      if (g) g->setZero(np);
      return std::numeric_limits<double>::infinity();
    }
  };

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_logp;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    Eigen::VectorXd logp0(np);
    if (r == 0 && warm) {
      logp0[0] = std::log(warm->sigma_se);
      for (int k = 0; k < d; ++k) logp0[1 + k] = std::log(warm->theta[k]);
      logp0[1 + d] = std::log(std::max(warm->tau, bounds.tau_lo));
      logp0 = logp0.cwiseMax(box.lo).cwiseMin(box.hi);
    } else if (r == 0) {
      // heuristic center start
      logp0 = 0.5 * (box.lo + box.hi);
    } else {
      for (int i = 0; i < np; ++i)
        logp0[i] = rng.uniform(box.lo[i], box.hi[i]);
    }
    LbfgsResult res = lbfgs_minimize(obj, box.to_unbounded(logp0));
    if (res.fx < best) {
      best = res.fx;
      best_logp = box.to_bounded(res.x);
    }
  }
  if (!std::isfinite(best)) throw FitError("fit_gaussian_gp: all starts failed");
  return make_gaussian_posterior(unpack(best_logp), data);
}

Prediction predict_gaussian(const GaussianPosterior& post,
                            const Eigen::MatrixXd& Xstar) {
  Prediction out;
  const Eigen::MatrixXd Ks =
      cross_kernel(post.data.inputs, Xstar, post.params);  // n x m
  out.mean = Ks.transpose() * post.alpha;
  Eigen::MatrixXd V = Ks;
  post.chol.triangularView<Eigen::Lower>().solveInPlace(V);
  out.cov = kernel_matrix(Xstar, post.params) - V.transpose() * V;
  return out;
}

MeanSd predict_gaussian_at(const GaussianPosterior& post,
                           const Eigen::VectorXd& x) {
  const Eigen::VectorXd k = kernel_row(post.data.inputs, x, post.params);
  Eigen::VectorXd v = k;
  post.chol.triangularView<Eigen::Lower>().solveInPlace(v);
  const double var =
      std::max(post.params.sigma_se * post.params.sigma_se - v.squaredNorm(),
               0.0);
  return {k.dot(post.alpha), std::sqrt(var)};
}

GaussianPosterior update_gaussian(const GaussianPosterior& post,
                                  const Eigen::VectorXd& x_new, double y_new,
                                  double replication) {
  GaussianPosterior out;
  out.params = post.params;
  out.data = post.data.appended(x_new, y_new, replication);
  out.jitter = post.jitter;
  const Eigen::VectorXd b = kernel_row(post.data.inputs, x_new, post.params);
  const double c = post.params.sigma_se * post.params.sigma_se +
                   post.params.tau * post.params.tau / replication +
                   post.jitter;
  try {
    out.chol = chol_append(post.chol, b, c);
  } catch (const FitError&) {
    return make_gaussian_posterior(post.params, out.data);
  }
  out.alpha = chol_solve(out.chol, out.data.responses);
  return out;
}

}  // namespace lse
