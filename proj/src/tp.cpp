#include "lse/tp.hpp"

#include <cmath>
#include <limits>

#include "lse/optim.hpp"

namespace lse {

namespace {

Eigen::MatrixXd noise_kernel(const KernelParams& params,
                             const TrainingSet& data) {
  Eigen::MatrixXd C = kernel_matrix(data.inputs, params);
  for (Eigen::Index i = 0; i < data.size(); ++i)
    C(i, i) += params.tau * params.tau / data.replication_at(i);
  return C;
}

}  // namespace

double tp_log_marginal_likelihood(const KernelParams& params,
                                  const TrainingSet& data) {
  const double nu = *params.nu;
  const double n = static_cast<double>(data.size());
  const Eigen::MatrixXd L = chol_with_jitter(
      noise_kernel(params, data), params.sigma_se * params.sigma_se);
  const double beta =
      data.responses.dot(chol_solve(L, data.responses));
  return std::lgamma(0.5 * (nu + n)) - std::lgamma(0.5 * nu) -
         0.5 * n * std::log((nu - 2.0) * M_PI) - 0.5 * chol_logdet(L) -
         0.5 * (nu + n) * std::log1p(beta / (nu - 2.0));
}

TPosterior make_tp_posterior(const KernelParams& params,
                             const TrainingSet& data) {
  TPosterior tp;
  tp.params = params;
  tp.data = data;
  tp.chol = chol_with_jitter(noise_kernel(params, data),
                             params.sigma_se * params.sigma_se);
  tp.alpha = chol_solve(tp.chol, data.responses);
  tp.beta = data.responses.dot(tp.alpha);
  return tp;
}

TPosterior fit_tp(const TrainingSet& data, const ParamBounds& bounds,
                  int restarts, Rng& rng, const KernelParams* warm) {
  if (data.size() < 2) throw FitError("fit_tp: needs n >= 2");
  const int d = data.dim();
  const int np = d + 3;

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
      return -tp_log_marginal_likelihood(unpack(box.to_bounded(u)), data);
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
  lopts.max_iters = 80;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    Eigen::VectorXd logp0(np);
    if (r == 0 && warm) {
      logp0[0] = std::log(warm->sigma_se);
      for (int k = 0; k < d; ++k) logp0[1 + k] = std::log(warm->theta[k]);
      logp0[1 + d] = std::log(std::max(warm->tau, bounds.tau_lo));
      logp0[2 + d] = std::log(warm->nu.value_or(5.0));
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
  if (!std::isfinite(best)) throw FitError("fit_tp: all starts failed");
  return make_tp_posterior(unpack(best_logp), data);
}

TpPrediction predict_tp(const TPosterior& tp, const Eigen::MatrixXd& Xstar) {
  TpPrediction out;
  const Eigen::MatrixXd Ks = cross_kernel(tp.data.inputs, Xstar, tp.params);
  out.mean = Ks.transpose() * tp.alpha;
  Eigen::MatrixXd V = Ks;
  tp.chol.triangularView<Eigen::Lower>().solveInPlace(V);
  out.cov = tp.cov_factor() *
            (kernel_matrix(Xstar, tp.params) - V.transpose() * V);
  out.dof = tp.predictive_dof();
  return out;
}

MeanSd predict_tp_at(const TPosterior& tp, const Eigen::VectorXd& x) {
  const Eigen::VectorXd k = kernel_row(tp.data.inputs, x, tp.params);
  Eigen::VectorXd v = k;
  tp.chol.triangularView<Eigen::Lower>().solveInPlace(v);
  const double var = std::max(
      tp.params.sigma_se * tp.params.sigma_se - v.squaredNorm(), 0.0);
  return {k.dot(tp.alpha), std::sqrt(tp.cov_factor() * var)};
}

}  // namespace lse
