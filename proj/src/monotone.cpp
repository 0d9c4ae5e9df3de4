#include "lse/monotone.hpp"

#include <algorithm>
#include <cmath>

#include "lse/sobol.hpp"
#include "lse/stats.hpp"

namespace lse {

namespace {

double mills(double u) {
  if (u < -30.0) return -u - 1.0 / u + 2.0 / (u * u * u);
  return stats::norm_pdf(u) / stats::norm_cdf(u);
}

Eigen::VectorXd joint_kvec_gradient(const MonotonePosterior& post,
                                    const Eigen::VectorXd& x, int coord) {
  const Eigen::Index nv = post.n_virtual();
  const Eigen::Index n = post.data.size();
  Eigen::VectorXd k(nv + n);
  for (Eigen::Index i = 0; i < nv; ++i)
    k[i] = se_kernel_dxdx2(x, post.virtuals[i].location, coord,
                           post.virtuals[i].coordinate, post.params);
  for (Eigen::Index i = 0; i < n; ++i)
    k[nv + i] =
        se_kernel_dx(x, post.data.inputs.row(i).transpose(), coord,
                     post.params);
  return k;
}

struct EpProblem {
  Eigen::MatrixXd K;            // joint prior
  Eigen::VectorXd probit_a;     // slope per site; 0 marks a Gaussian site
  Eigen::VectorXd gauss_prec;   // fixed precision for Gaussian sites
  Eigen::VectorXd gauss_nat;    // fixed natural mean for Gaussian sites
};

EPSites run_ep(const EpProblem& pb, const MonotoneOptions& opts,
               const EPSites* warm) {
  const Eigen::Index n = pb.K.rows();
  Eigen::VectorXd ttau = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd tnu = Eigen::VectorXd::Zero(n);
  if (warm && warm->sigma2_tilde.size() == n) {
    for (Eigen::Index i = 0; i < n; ++i)
      if (pb.probit_a[i] != 0.0 && warm->sigma2_tilde[i] > 0.0) {
        ttau[i] = 1.0 / warm->sigma2_tilde[i];
        tnu[i] = warm->mu_tilde[i] * ttau[i];
      }
  }

  auto posterior = [&](Eigen::MatrixXd& Sigma, Eigen::VectorXd& mu) {
    Eigen::VectorXd prec(n), nat(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pb.probit_a[i] != 0.0) {
        prec[i] = ttau[i];
        nat[i] = tnu[i];
      } else {
        prec[i] = pb.gauss_prec[i];
        nat[i] = pb.gauss_nat[i];
      }
    }
    const Eigen::VectorXd sr = prec.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd B = sr.asDiagonal() * pb.K * sr.asDiagonal();
    B.diagonal().array() += 1.0;
    Eigen::LLT<Eigen::MatrixXd> llt(B);
    const Eigen::MatrixXd SK = sr.asDiagonal() * pb.K;
    Sigma = pb.K - SK.transpose() * llt.solve(SK);
    mu = Sigma * nat;
  };

  Eigen::MatrixXd Sigma;
  Eigen::VectorXd mu;
  posterior(Sigma, mu);

  EPSites out;
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = pb.probit_a[j];
      if (a == 0.0) continue;
      const double sj2 = Sigma(j, j);
      const double tau_cav = 1.0 / sj2 - ttau[j];
      if (tau_cav <= 1e-12) continue;
      const double nu_cav = mu[j] / sj2 - tnu[j];
      const double m_cav = nu_cav / tau_cav;
      const double v_cav = 1.0 / tau_cav;

      const double denom = std::sqrt(1.0 + a * a * v_cav);
      const double z = a * m_cav / denom;
      const double mz = mills(z);
      const double m_hat = m_cav + a * v_cav * mz / denom;
      double v_hat =
          v_cav - v_cav * v_cav * a * a * mz * (z + mz) / (denom * denom);
      v_hat = std::max(v_hat, 1e-12 * v_cav);

      double ttau_new = 1.0 / v_hat - tau_cav;
      double tnu_new = m_hat / v_hat - nu_cav;
      ttau_new = std::max(ttau_new, 1e-10);
      ttau_new = opts.damping * ttau_new + (1.0 - opts.damping) * ttau[j];
      tnu_new = opts.damping * tnu_new + (1.0 - opts.damping) * tnu[j];

      const double d_tau = ttau_new - ttau[j];
      max_delta = std::max({max_delta, std::fabs(d_tau),
                            std::fabs(tnu_new - tnu[j])});
      ttau[j] = ttau_new;
      tnu[j] = tnu_new;

      // rank-1 refresh of the posterior
      const Eigen::VectorXd sj = Sigma.col(j);
      Sigma.noalias() -= (d_tau / (1.0 + d_tau * sj2)) * sj * sj.transpose();
      Eigen::VectorXd nat(n);
      for (Eigen::Index i = 0; i < n; ++i)
        nat[i] = pb.probit_a[i] != 0.0 ? tnu[i] : pb.gauss_nat[i];
      mu = Sigma * nat;
    }
    posterior(Sigma, mu);  // full refresh once per sweep
    if (max_delta < opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.sweeps = sweep;
  out.mu_tilde.resize(n);
  out.sigma2_tilde.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pb.probit_a[i] != 0.0) {
      out.mu_tilde[i] = tnu[i] / ttau[i];
      out.sigma2_tilde[i] = 1.0 / ttau[i];
    } else {
      out.mu_tilde[i] = 0.0;
      out.sigma2_tilde[i] = 0.0;
    }
  }
  return out;
}

void finalize_posterior(MonotonePosterior& post) {
  const Eigen::Index nv = post.n_virtual();
  const Eigen::Index n = post.data.size();
  Eigen::MatrixXd B = joint_kernel(post.data.inputs, post.virtuals,
                                   post.params);
  Eigen::VectorXd mu_tilde(nv + n);
  const double prior = post.params.sigma_se * post.params.sigma_se;
  const double var_cap = 1e10 * prior;
  for (Eigen::Index i = 0; i < nv; ++i) {
    B(i, i) += std::min(post.sites.sigma2_tilde[i], var_cap);
    mu_tilde[i] = post.sites.mu_tilde[i];
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (post.classify) {
      B(nv + i, nv + i) +=
          std::min(post.sites.sigma2_tilde[nv + i], var_cap);
      mu_tilde[nv + i] = post.sites.mu_tilde[nv + i];
    } else {
      B(nv + i, nv + i) += post.params.tau * post.params.tau /
                           post.data.replication_at(i);
      mu_tilde[nv + i] = post.data.responses[i];
    }
  }
  post.chol_b = chol_with_jitter(std::move(B), prior);
  post.mean_w = chol_solve(post.chol_b, mu_tilde);
}

}  // namespace

Eigen::VectorXd monotone_kvec(const MonotonePosterior& post,
                              const Eigen::VectorXd& x) {
  const Eigen::Index nv = post.n_virtual();
  const Eigen::Index n = post.data.size();
  Eigen::VectorXd k(nv + n);
  for (Eigen::Index i = 0; i < nv; ++i)
    k[i] = se_kernel_dx2(x, post.virtuals[i].location,
                         post.virtuals[i].coordinate, post.params);
  k.tail(n) = kernel_row(post.data.inputs, x, post.params);
  return k;
}

Eigen::MatrixXd joint_kernel(const Eigen::MatrixXd& X,
                             const std::vector<VirtualDerivObs>& virtuals,
                             const KernelParams& params) {
  const Eigen::Index nv = static_cast<Eigen::Index>(virtuals.size());
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(nv + n, nv + n);
  for (Eigen::Index i = 0; i < nv; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = se_kernel_dxdx2(
          virtuals[i].location, virtuals[j].location, virtuals[i].coordinate,
          virtuals[j].coordinate, params);
      K(i, j) = K(j, i) = v;
    }
  for (Eigen::Index i = 0; i < nv; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = se_kernel_dx(virtuals[i].location,
                                    X.row(j).transpose(),
                                    virtuals[i].coordinate, params);
      K(i, nv + j) = K(nv + j, i) = v;
    }
  K.bottomRightCorner(n, n) = kernel_matrix(X, params);
  return K;
}

MonotonePosterior ep_fit_monotone(const TrainingSet& data,
                                  const std::vector<VirtualDerivObs>& virtuals,
                                  const KernelParams& params, bool classify,
                                  const std::vector<int>& directions,
                                  const MonotoneOptions& opts) {
  MonotonePosterior post;
  post.params = params;
  post.data = data;
  post.classify = classify;
  post.virtuals = virtuals;
  post.directions = directions;

  const Eigen::Index nv = post.n_virtual();
  const Eigen::Index n = data.size();
  if (nv == 0 && !classify) {
    // no probit factor anywhere: exact Gaussian posterior
    post.sites.converged = true;
    post.sites.mu_tilde.resize(0);
    post.sites.sigma2_tilde.resize(0);
    finalize_posterior(post);
    return post;
  }

  EpProblem pb;
  pb.K = joint_kernel(data.inputs, virtuals, params);
  pb.probit_a = Eigen::VectorXd::Zero(nv + n);
  pb.gauss_prec = Eigen::VectorXd::Zero(nv + n);
  pb.gauss_nat = Eigen::VectorXd::Zero(nv + n);
  for (Eigen::Index i = 0; i < nv; ++i)
    pb.probit_a[i] =
        static_cast<double>(virtuals[i].direction) / virtuals[i].eta;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (classify) {
      pb.probit_a[nv + i] = data.responses[i] < 0.0 ? -1.0 : 1.0;
    } else {
      const double v = params.tau * params.tau / data.replication_at(i);
      pb.gauss_prec[nv + i] = 1.0 / std::max(v, 1e-12);
      pb.gauss_nat[nv + i] = data.responses[i] * pb.gauss_prec[nv + i];
    }
  }

  post.sites = run_ep(pb, opts, nullptr);
  if (!post.sites.converged)
    throw FitError("ep_fit_monotone: EP did not converge after " +
                   std::to_string(post.sites.sweeps) + " sweeps");
  if (post.sites.sigma2_tilde.size() == 0 && nv + n > 0)
    throw FitError("ep_fit_monotone: empty site set");
  finalize_posterior(post);
  return post;
}

Prediction predict_monotone(const MonotonePosterior& post,
                            const Eigen::MatrixXd& Xstar) {
  const Eigen::Index m = Xstar.rows();
  Prediction out;
  out.mean.resize(m);
  out.cov.resize(m, m);
  Eigen::MatrixXd A(post.chol_b.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd k = monotone_kvec(post, Xstar.row(i).transpose());
    out.mean[i] = k.dot(post.mean_w);
    A.col(i) = k;
  }
  post.chol_b.triangularView<Eigen::Lower>().solveInPlace(A);
  out.cov = kernel_matrix(Xstar, post.params) - A.transpose() * A;
  return out;
}

MeanSd predict_monotone_at(const MonotonePosterior& post,
                           const Eigen::VectorXd& x) {
  Eigen::VectorXd k = monotone_kvec(post, x);
  const double mean = k.dot(post.mean_w);
  post.chol_b.triangularView<Eigen::Lower>().solveInPlace(k);
  const double var = std::max(
      post.params.sigma_se * post.params.sigma_se - k.squaredNorm(), 0.0);
  return {mean, std::sqrt(var)};
}

MeanSd predict_monotone_gradient(const MonotonePosterior& post,
                                 const Eigen::VectorXd& x, int coordinate) {
  Eigen::VectorXd k = joint_kvec_gradient(post, x, coordinate);
  const double mean = k.dot(post.mean_w);
  const double prior = post.params.sigma_se * post.params.sigma_se /
                       (post.params.theta[coordinate] *
                        post.params.theta[coordinate]);
  post.chol_b.triangularView<Eigen::Lower>().solveInPlace(k);
  const double var = std::max(prior - k.squaredNorm(), 0.0);
  return {mean, std::sqrt(var)};
}

std::vector<VirtualDerivObs> place_virtual_points(
    const MonotonePosterior& post, const Eigen::MatrixXd& box, int budget,
    const MonotoneOptions& opts) {
  std::vector<VirtualDerivObs> out;
  if (budget <= 0) return out;
  const int d = post.params.dim();

  // candidate grid: full lattice up to two axes, Sobol beyond
  Eigen::MatrixXd cands;
  const int g = opts.candidate_grid;
  if (d == 1) {
    cands.resize(g, 1);
    for (int i = 0; i < g; ++i)
      cands(i, 0) = box(0, 0) + (box(0, 1) - box(0, 0)) * (i + 0.5) / g;
  } else if (d == 2) {
    cands.resize(g * g, 2);
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        cands(i * g + j, 0) =
            box(0, 0) + (box(0, 1) - box(0, 0)) * (i + 0.5) / g;
        cands(i * g + j, 1) =
            box(1, 0) + (box(1, 1) - box(1, 0)) * (j + 0.5) / g;
      }
  } else {
    Sobol sob(d, 1);
    cands = sob.sample(g * g);
    for (int i = 0; i < cands.rows(); ++i)
      for (int j = 0; j < d; ++j)
        cands(i, j) = box(j, 0) + (box(j, 1) - box(j, 0)) * cands(i, j);
  }

  struct Scored {
    double p;
    Eigen::Index row;
    int coord;
  };
  std::vector<Scored> scored;
  for (Eigen::Index i = 0; i < cands.rows(); ++i) {
    for (int j = 0; j < d; ++j) {
      if (j >= static_cast<int>(post.directions.size()) ||
          post.directions[j] == 0)
        continue;
      const MeanSd g_ms =
          predict_monotone_gradient(post, cands.row(i).transpose(), j);
      if (!(g_ms.sd > 0.0)) continue;
      const double p = stats::norm_cdf(
          -static_cast<double>(post.directions[j]) * g_ms.mean / g_ms.sd);
      scored.push_back({p, i, j});
    }
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.p != b.p) return a.p > b.p;
    if (a.row != b.row) return a.row < b.row;
    return a.coord < b.coord;
  });

  auto taken = [&](const Eigen::VectorXd& loc, int coord) {
    for (const auto& v : post.virtuals)
      if (v.coordinate == coord && (v.location - loc).norm() < 1e-12)
        return true;
    for (const auto& v : out)
      if (v.coordinate == coord && (v.location - loc).norm() < 1e-12)
        return true;
    return false;
  };
  for (const auto& s : scored) {
    if (static_cast<int>(out.size()) >= budget) break;
    const Eigen::VectorXd loc = cands.row(s.row).transpose();
    if (taken(loc, s.coord)) continue;
    VirtualDerivObs v;
    v.location = loc;
    v.coordinate = s.coord;
    v.direction = post.directions[s.coord];
    v.eta = post.virtuals.empty() ? opts.eta : post.virtuals.front().eta;
    out.push_back(std::move(v));
  }
  return out;
}

Eigen::VectorXd lookahead_var_monotone(const MonotonePosterior& post,
                                       const Eigen::VectorXd& x_new,
                                       const Eigen::MatrixXd& Xstar,
                                       double noise_var) {
  const double prior = post.params.sigma_se * post.params.sigma_se;
  Eigen::VectorXd ac = monotone_kvec(post, x_new);
  const Eigen::VectorXd kc = ac;
  post.chol_b.triangularView<Eigen::Lower>().solveInPlace(ac);
  const double s2c = std::max(prior - ac.squaredNorm(), 0.0);

  double denom_add;
  if (post.classify) {
    const double zhat = kc.dot(post.mean_w);
    const double phi = stats::norm_pdf(zhat);
    const double vp = phi * phi / std::pow(stats::norm_cdf(zhat), 2) +
                      zhat * phi / stats::norm_cdf(zhat);
    const double vm = phi * phi / std::pow(stats::norm_cdf(-zhat), 2) -
                      zhat * phi / stats::norm_cdf(-zhat);
    const double pp = stats::norm_cdf(zhat / std::sqrt(1.0 + s2c));
    denom_add = 1.0 / (vp * pp + vm * (1.0 - pp));
  } else {
    denom_add =
        noise_var >= 0.0 ? noise_var : post.params.tau * post.params.tau;
  }

  const Eigen::Index m = Xstar.rows();
  Eigen::VectorXd out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd x = Xstar.row(i).transpose();
    Eigen::VectorXd a = monotone_kvec(post, x);
    post.chol_b.triangularView<Eigen::Lower>().solveInPlace(a);
    const double s2 = std::max(prior - a.squaredNorm(), 0.0);
    const double v = se_kernel(x, x_new, post.params) - a.dot(ac);
    out[i] = std::max(s2 - v * v / (denom_add + s2c), 0.0);
  }
  return out;
}

MonotonePosterior monotone_with_observation(const MonotonePosterior& post,
                                            const Eigen::VectorXd& x,
                                            double y, double replication) {
  MonotoneOptions opts;
  MonotonePosterior out;
  out.params = post.params;
  out.classify = post.classify;
  out.virtuals = post.virtuals;
  out.directions = post.directions;
  out.data = post.data.appended(x, post.classify ? (y < 0.0 ? -1.0 : 1.0) : y,
                                replication);
  // warm-started EP re-run; the new site starts from scratch
  EPSites warm = post.sites;
  if (warm.sigma2_tilde.size() > 0) {
    const Eigen::Index n_old = warm.sigma2_tilde.size();
    warm.mu_tilde.conservativeResize(n_old + 1);
    warm.sigma2_tilde.conservativeResize(n_old + 1);
    warm.mu_tilde[n_old] = 0.0;
    warm.sigma2_tilde[n_old] = 0.0;
  }
  const Eigen::Index nv = out.n_virtual();
  const Eigen::Index n = out.data.size();
  if (nv == 0 && !out.classify) {
    out.sites = post.sites;
    finalize_posterior(out);
    return out;
  }
  EpProblem pb;
  pb.K = joint_kernel(out.data.inputs, out.virtuals, out.params);
  pb.probit_a = Eigen::VectorXd::Zero(nv + n);
  pb.gauss_prec = Eigen::VectorXd::Zero(nv + n);
  pb.gauss_nat = Eigen::VectorXd::Zero(nv + n);
  for (Eigen::Index i = 0; i < nv; ++i)
    pb.probit_a[i] =
        static_cast<double>(out.virtuals[i].direction) / out.virtuals[i].eta;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.classify) {
      pb.probit_a[nv + i] = out.data.responses[i] < 0.0 ? -1.0 : 1.0;
    } else {
      const double v =
          out.params.tau * out.params.tau / out.data.replication_at(i);
      pb.gauss_prec[nv + i] = 1.0 / std::max(v, 1e-12);
      pb.gauss_nat[nv + i] = out.data.responses[i] * pb.gauss_prec[nv + i];
    }
  }
  out.sites = run_ep(pb, opts, &warm);
  if (!out.sites.converged)
    throw FitError("monotone_with_observation: EP did not reconverge");
  finalize_posterior(out);
  return out;
}

}  // namespace lse
