#include "lse/lookahead.hpp"

#include <cmath>

#include "lse/stats.hpp"

namespace lse {

double woodbury_quadform(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         double c, double d) {
  const Eigen::VectorXd Ainv_b = A.ldlt().solve(b);
  const double bab = b.dot(Ainv_b);
  const double gap = c - bab;
  if (gap == 0.0) throw std::invalid_argument("woodbury_quadform: singular");
  return bab - (d - bab) * (d - bab) / gap;
}

namespace {

// covariance between each target and the candidate plus the variances,
// all through a shared B-factor (chol of K + noise-like diagonal).
struct PairStats {
  Eigen::VectorXd v;      // v(x_m, x_c)
  Eigen::VectorXd s2;     // s^2(x_m)
  double s2_cand = 0.0;   // s^2(x_c)
};

PairStats pair_stats(const Eigen::MatrixXd& train, const KernelParams& p,
                     const Eigen::MatrixXd& cholB, const LookaheadQuery& q) {
  PairStats out;
  const Eigen::Index m = q.targets.rows();
  const double prior = p.sigma_se * p.sigma_se;
  Eigen::VectorXd ac = kernel_row(train, q.candidate, p);
  cholB.triangularView<Eigen::Lower>().solveInPlace(ac);
  out.s2_cand = std::max(prior - ac.squaredNorm(), 0.0);
  out.v.resize(m);
  out.s2.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd x = q.targets.row(i).transpose();
    Eigen::VectorXd a = kernel_row(train, x, p);
    cholB.triangularView<Eigen::Lower>().solveInPlace(a);
    out.s2[i] = std::max(prior - a.squaredNorm(), 0.0);
    out.v[i] = se_kernel(x, q.candidate, p) - a.dot(ac);
  }
  return out;
}

Eigen::VectorXd subtract_term(const PairStats& st, double denom_add) {
  Eigen::VectorXd out(st.v.size());
  const double denom = denom_add + st.s2_cand;
  for (Eigen::Index i = 0; i < st.v.size(); ++i)
    out[i] = std::max(st.s2[i] - st.v[i] * st.v[i] / denom, 0.0);
  return out;
}

}  // namespace

Eigen::VectorXd lookahead_var_gaussian(const GaussianPosterior& post,
                                       const LookaheadQuery& q,
                                       double noise_var) {
  const double tau2 =
      noise_var >= 0.0 ? noise_var : post.params.tau * post.params.tau;
  return subtract_term(
      pair_stats(post.data.inputs, post.params, post.chol, q), tau2);
}

Eigen::VectorXd lookahead_var_tgp(const TgpPosterior& post,
                                  const LookaheadQuery& q,
                                  double noise_var) {
  const double nu = *post.params.nu;
  const double tau2 =
      noise_var >= 0.0 ? noise_var : post.params.tau * post.params.tau;
  return subtract_term(
      pair_stats(post.data.inputs, post.params, post.chol_b, q),
      tau2 * (nu + 1.0) / (nu - 1.0));
}

double clgp_expected_curvature(double zhat, double s) {
  const double phi = stats::norm_pdf(zhat);
  const double cp = stats::norm_cdf(zhat);
  const double cm = stats::norm_cdf(-zhat);
  const double v_plus = phi * phi / (cp * cp) + zhat * phi / cp;
  const double v_minus = phi * phi / (cm * cm) - zhat * phi / cm;
  const double p_plus = clgp_class_probability(zhat, s);
  return v_plus * p_plus + v_minus * (1.0 - p_plus);
}

Eigen::VectorXd lookahead_var_clgp(const ClgpPosterior& post,
                                   const LookaheadQuery& q) {
  const PairStats st =
      pair_stats(post.data.inputs, post.params, post.chol_b, q);
  const Eigen::VectorXd kc =
      kernel_row(post.data.inputs, q.candidate, post.params);
  const double zhat = kc.dot(post.mode_weights);
  const double vcheck = clgp_expected_curvature(zhat, std::sqrt(st.s2_cand));
  return subtract_term(st, 1.0 / vcheck);
}

Eigen::VectorXd lookahead_var_tp(const TPosterior& tp,
                                 const LookaheadQuery& q, double noise_var) {
  const double nu = *tp.params.nu;
  const double n = static_cast<double>(tp.size());
  const double tau2 =
      noise_var >= 0.0 ? noise_var : tp.params.tau * tp.params.tau;
  // Gaussian-part look-ahead, then the step-(n+1) inflation with the
  // plug-in beta-check = beta + nu/(nu-2).
  const Eigen::VectorXd gsn = subtract_term(
      pair_stats(tp.data.inputs, tp.params, tp.chol, q), tau2);
  const double beta_check = tp.beta + nu / (nu - 2.0);
  return ((nu + beta_check - 2.0) / (nu + n - 1.0)) * gsn;
}

}  // namespace lse
