#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lse/clgp.hpp"
#include "lse/gp.hpp"
#include "lse/lookahead.hpp"
#include "lse/monotone.hpp"
#include "lse/optim.hpp"
#include "lse/stats.hpp"
#include "lse/surrogate.hpp"
#include "lse/tgp.hpp"
#include "lse/tp.hpp"

using namespace lse;

namespace {

KernelParams params_with_nu(int d, double sigma, double theta, double tau,
                            double nu) {
  KernelParams p;
  p.sigma_se = sigma;
  p.theta = Eigen::VectorXd::Constant(d, theta);
  p.tau = tau;
  p.nu = nu;
  return p;
}

TrainingSet smooth_data(int n, Rng& rng, double noise_sd) {
  TrainingSet data;
  data.inputs.resize(n, 1);
  data.responses.resize(n);
  for (int i = 0; i < n; ++i) {
    data.inputs(i, 0) = (i + 0.5) / n;
    data.responses[i] =
        std::sin(2.5 * data.inputs(i, 0)) + noise_sd * rng.normal();
  }
  return data;
}

}  // namespace

// ---------------------------------------------------------------- t-GP

TEST_CASE("tgp log likelihood closed form and invariances") {
  TrainingSet data;
  data.inputs = Eigen::MatrixXd::Zero(1, 1);
  data.responses = Eigen::VectorXd::Constant(1, 0.37);
  KernelParams p = params_with_nu(1, 1.0, 1.0, 0.1, 3.0);

  Eigen::VectorXd f = data.responses;
  CHECK(tgp_log_likelihood(f, data, p) ==
        doctest::Approx(stats::t_log_pdf_scaled(0.0, 3.0, 0.1)).epsilon(1e-12));

  // translating y and f together changes nothing
  TrainingSet shifted = data;
  shifted.responses.array() += 5.0;
  Eigen::VectorXd fs = f.array() + 5.0;
  CHECK(tgp_log_likelihood(fs, shifted, p) ==
        doctest::Approx(tgp_log_likelihood(f, data, p)).epsilon(1e-12));

  // a heavy outlier is penalized less than under the Gaussian model
  const double r = 1.5;  // outlier residual, 15 sigma
  const double t_drop = stats::t_log_pdf_scaled(0.0, 3.0, 0.1) -
                        stats::t_log_pdf_scaled(r, 3.0, 0.1);
  const double g_drop = 0.5 * r * r / (0.1 * 0.1);
  CHECK(t_drop < g_drop);
}

TEST_CASE("tgp laplace mode: symmetry, gradient, gaussian limit") {
  // single observation at zero stays at zero
  TrainingSet one;
  one.inputs = Eigen::MatrixXd::Zero(1, 1);
  one.responses = Eigen::VectorXd::Zero(1);
  KernelParams p1 = params_with_nu(1, 1.0, 1.0, 0.2, 3.0);
  LaplaceState st1 = laplace_fit_tgp(one, p1);
  CHECK(st1.converged);
  CHECK(st1.mode[0] == doctest::Approx(0.0).epsilon(1e-9));

  // finite-difference stationarity at the mode, n <= 10
  Rng rng(5);
  TrainingSet data = smooth_data(8, rng, 0.1);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.15, 4.0);
  LaplaceState st = laplace_fit_tgp(data, p);
  CHECK(st.converged);

  Eigen::MatrixXd K = kernel_matrix(data.inputs, p);
  K.diagonal().array() += 1e-8;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  auto psi = [&](const Eigen::VectorXd& f) {
    return tgp_log_likelihood(f, data, p) - 0.5 * f.dot(ldlt.solve(f));
  };
  Eigen::VectorXd g = fd_gradient(psi, st.mode, 1e-6);
  CHECK(g.lpNorm<Eigen::Infinity>() < 1e-5);

  // hessian entries match the closed form
  for (int i = 0; i < 8; ++i) {
    const double r = data.responses[i] - st.mode[i];
    const double nu = 4.0, t2 = 0.15 * 0.15;
    const double w = (nu + 1.0) * (nu * t2 - r * r) /
                     std::pow(r * r + nu * t2, 2);
    CHECK(st.hess_diag[i] == doctest::Approx(w).epsilon(1e-10));
  }

  // with a nearly Gaussian likelihood the mode matches the GP mean
  KernelParams pg = params_with_nu(1, 1.0, 0.5, 0.15, 1000.0);
  LaplaceState stg = laplace_fit_tgp(data, pg);
  KernelParams pgsn = pg;
  pgsn.nu.reset();
  GaussianPosterior gsn = make_gaussian_posterior(pgsn, data);
  Eigen::VectorXd gp_mean =
      kernel_matrix(data.inputs, pgsn) * gsn.alpha;
  CHECK((stg.mode - gp_mean).lpNorm<Eigen::Infinity>() < 1e-3);
}

TEST_CASE("tgp predictions degenerate to gaussian gp at large nu") {
  Rng rng(7);
  TrainingSet data = smooth_data(20, rng, 0.1);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.2, 1000.0);
  TgpPosterior tpost = make_tgp_posterior(p, data);
  KernelParams pg = p;
  pg.nu.reset();
  GaussianPosterior gpost = make_gaussian_posterior(pg, data);

  for (int i = 0; i <= 50; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, i / 50.0);
    MeanSd a = predict_tgp_at(tpost, x);
    MeanSd b = predict_gaussian_at(gpost, x);
    CHECK(std::fabs(a.mean - b.mean) < 1e-2);
    CHECK(std::fabs(a.sd - b.sd) < 1e-2);
  }

  // far field reverts to the prior
  MeanSd far = predict_tgp_at(tpost, Eigen::VectorXd::Constant(1, 60.0));
  CHECK(far.mean == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(far.sd == doctest::Approx(1.0).epsilon(1e-8));

  // informative training input has below-prior variance
  MeanSd at0 = predict_tgp_at(tpost, data.inputs.row(3).transpose());
  CHECK(at0.sd < 1.0);
}

// ---------------------------------------------------------------- Cl-GP

TEST_CASE("clgp laplace mode properties") {
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.0, 0.0);
  p.nu.reset();

  // single +1 vs single -1 observation: modes are negatives
  TrainingSet plus;
  plus.inputs = Eigen::MatrixXd::Zero(1, 1);
  plus.responses = Eigen::VectorXd::Constant(1, 1.0);
  TrainingSet minus = plus;
  minus.responses[0] = -1.0;
  LaplaceState sp = laplace_fit_clgp(plus, p);
  LaplaceState sm = laplace_fit_clgp(minus, p);
  CHECK(sp.mode[0] > 0.0);
  CHECK(sp.mode[0] == doctest::Approx(-sm.mode[0]).epsilon(1e-8));

  // unanimous labels push every mode entry positive
  TrainingSet all;
  all.inputs.resize(6, 1);
  all.responses = Eigen::VectorXd::Ones(6);
  for (int i = 0; i < 6; ++i) all.inputs(i, 0) = i / 6.0;
  LaplaceState sa = laplace_fit_clgp(all, p);
  for (int i = 0; i < 6; ++i) CHECK(sa.mode[i] > 0.0);
  // probit curvature is strictly positive
  for (int i = 0; i < 6; ++i) CHECK(sa.hess_diag[i] > 0.0);

  // finite-difference stationarity
  Rng rng(11);
  TrainingSet data;
  data.inputs.resize(9, 1);
  data.responses.resize(9);
  for (int i = 0; i < 9; ++i) {
    data.inputs(i, 0) = (i + 0.5) / 9.0;
    data.responses[i] = data.inputs(i, 0) < 0.5 ? 1.0 : -1.0;
  }
  LaplaceState st = laplace_fit_clgp(data, p);
  Eigen::MatrixXd K = kernel_matrix(data.inputs, p);
  K.diagonal().array() += 1e-8;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  auto psi = [&](const Eigen::VectorXd& z) {
    double acc = 0.0;
    for (int i = 0; i < 9; ++i)
      acc += std::log(stats::norm_cdf(data.responses[i] * z[i]));
    return acc - 0.5 * z.dot(ldlt.solve(z));
  };
  Eigen::VectorXd g = fd_gradient(psi, st.mode, 1e-6);
  CHECK(g.lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("clgp predictions and class probability") {
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.0, 0.0);
  p.nu.reset();

  // balanced labels at one input: zhat ~ 0 there
  TrainingSet bal;
  bal.inputs = Eigen::MatrixXd::Constant(2, 1, 0.5);
  bal.responses.resize(2);
  bal.responses << 1.0, -1.0;
  ClgpPosterior post = make_clgp_posterior(p, bal);
  MeanSd ms = predict_clgp_at(post, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(std::fabs(ms.mean) < 1e-8);

  // far field
  MeanSd far = predict_clgp_at(post, Eigen::VectorXd::Constant(1, 40.0));
  CHECK(far.mean == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(far.sd == doctest::Approx(1.0).epsilon(1e-8));

  // unanimous labels: sign of zhat at the training input matches
  TrainingSet uni;
  uni.inputs = Eigen::MatrixXd::Constant(3, 1, 0.3);
  uni.responses = Eigen::VectorXd::Constant(3, -1.0);
  ClgpPosterior up = make_clgp_posterior(p, uni);
  CHECK(predict_clgp_at(up, Eigen::VectorXd::Constant(1, 0.3)).mean < 0.0);

  CHECK(clgp_class_probability(0.0, 3.1) == doctest::Approx(0.5));
  CHECK(clgp_class_probability(1.96, 0.0) ==
        doctest::Approx(0.975).epsilon(1e-3));
  CHECK(clgp_class_probability(5.0, 1e9) == doctest::Approx(0.5).epsilon(1e-6));
}

// ---------------------------------------------------------------- TP

TEST_CASE("tp shares the gp mean and scales its covariance") {
  Rng rng(13);
  TrainingSet data = smooth_data(15, rng, 0.2);
  KernelParams p = params_with_nu(1, 0.9, 0.6, 0.25, 5.0);
  TPosterior tp = make_tp_posterior(p, data);
  KernelParams pg = p;
  pg.nu.reset();
  GaussianPosterior gp = make_gaussian_posterior(pg, data);

  Eigen::MatrixXd Xs(7, 1);
  for (int i = 0; i < 7; ++i) Xs(i, 0) = i / 6.0;
  TpPrediction pt = predict_tp(tp, Xs);
  Prediction pgm = predict_gaussian(gp, Xs);
  const double factor = tp.cov_factor();
  for (int i = 0; i < 7; ++i) {
    CHECK(pt.mean[i] == doctest::Approx(pgm.mean[i]).epsilon(1e-10));
    for (int j = 0; j < 7; ++j)
      CHECK(pt.cov(i, j) ==
            doctest::Approx(factor * pgm.cov(i, j)).epsilon(1e-9));
  }
  CHECK(pt.dof == doctest::Approx(5.0 + 15.0));

  // zero responses: beta = 0 and the factor deflates
  TrainingSet zero = data;
  zero.responses.setZero();
  TPosterior tz = make_tp_posterior(p, zero);
  CHECK(tz.beta == doctest::Approx(0.0));
  CHECK(tz.cov_factor() ==
        doctest::Approx((5.0 - 2.0) / (5.0 + 15.0 - 2.0)));
  CHECK(tz.cov_factor() < 1.0);

  // beta > n inflates
  TrainingSet big = data;
  big.responses = data.responses * 40.0;
  TPosterior tb = make_tp_posterior(p, big);
  CHECK(tb.beta > 15.0);
  CHECK(tb.cov_factor() > 1.0);
}

TEST_CASE("tp marginal likelihood approaches the gaussian one") {
  Rng rng(17);
  TrainingSet data = smooth_data(25, rng, 0.15);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.2, 1e4);
  KernelParams pg = p;
  pg.nu.reset();
  const double tp_ll = tp_log_marginal_likelihood(p, data);
  const double gp_ll = log_marginal_likelihood(pg, data);
  CHECK(tp_ll >= gp_ll - 0.1);
  CHECK(tp_ll == doctest::Approx(gp_ll).epsilon(0.01));
}

TEST_CASE("tp ml fit pushes nu to its bound on gaussian data") {
  Rng rng(19);
  TrainingSet data = smooth_data(40, rng, 0.1);
  ParamBounds bounds = ParamBounds::for_data(data, Eigen::VectorXd::Ones(1));
  bounds.nu_hi = 10.0;
  Rng fit_rng(23);
  TPosterior tp = fit_tp(data, bounds, 3, fit_rng);
  CHECK(*tp.params.nu > 8.0);

  // minimal n = 2 case runs
  TrainingSet two;
  two.inputs.resize(2, 1);
  two.inputs << 0.2, 0.8;
  two.responses.resize(2);
  two.responses << 0.1, -0.3;
  Rng r2(29);
  CHECK_NOTHROW(fit_tp(two, bounds, 1, r2));
}

// ---------------------------------------------------------------- look-ahead

TEST_CASE("woodbury quadform") {
  // vanishing correction when d = b'A^{-1}b
  Rng rng(31);
  Eigen::MatrixXd R(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) R(i, j) = rng.normal();
  Eigen::MatrixXd A = R * R.transpose() + 4.0 * Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd b(4);
  for (int i = 0; i < 4; ++i) b[i] = rng.normal();
  const double bab = b.dot(A.ldlt().solve(b));
  CHECK(woodbury_quadform(A, b, bab + 2.0, bab) ==
        doctest::Approx(bab).epsilon(1e-12));

  // dense bordered-inverse oracle: the returned value mirrors the dense
  // quadratic form around b'A^{-1}b (the correction enters subtracted,
  // which is the form consumed by the variance updates)
  const double c = bab + 1.7, d = 0.3;
  Eigen::MatrixXd M(5, 5);
  M.topLeftCorner(4, 4) = A;
  M.topRightCorner(4, 1) = b;
  M.bottomLeftCorner(1, 4) = b.transpose();
  M(4, 4) = c;
  Eigen::VectorXd rhs(5);
  rhs.head(4) = b;
  rhs[4] = d;
  const double dense = rhs.dot(M.inverse() * rhs);
  CHECK(woodbury_quadform(A, b, c, d) ==
        doctest::Approx(2.0 * bab - dense).epsilon(1e-10));

  // hand arithmetic: A = I, b = 0, c = 1, d = 1 -> -1
  CHECK(woodbury_quadform(Eigen::MatrixXd::Identity(3, 3),
                          Eigen::VectorXd::Zero(3), 1.0, 1.0) ==
        doctest::Approx(-1.0));
}

TEST_CASE("gaussian look-ahead is exact") {
  Rng rng(37);
  TrainingSet data = smooth_data(12, rng, 0.2);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.3, 0.0);
  p.nu.reset();
  GaussianPosterior post = make_gaussian_posterior(p, data);

  LookaheadQuery q;
  q.candidate = Eigen::VectorXd::Constant(1, 0.42);
  q.targets.resize(3, 1);
  q.targets << 0.42, 0.1, 0.9;
  Eigen::VectorXd ahead = lookahead_var_gaussian(post, q);

  // at the candidate itself: ratio formula
  const double s2 = std::pow(predict_gaussian_at(post, q.candidate).sd, 2);
  CHECK(ahead[0] ==
        doctest::Approx(s2 * 0.09 / (0.09 + s2)).epsilon(1e-9));

  // against an actual update with an arbitrary response
  GaussianPosterior upd = update_gaussian(post, q.candidate, 123.456);
  for (int i = 0; i < 3; ++i) {
    const double actual =
        std::pow(predict_gaussian_at(upd, q.targets.row(i).transpose()).sd, 2);
    CHECK(std::fabs(ahead[i] - actual) < 1e-8);
  }

  // independent target is unchanged
  LookaheadQuery far;
  far.candidate = q.candidate;
  far.targets = Eigen::MatrixXd::Constant(1, 1, 90.0);
  const double before =
      std::pow(predict_gaussian_at(post, far.targets.row(0).transpose()).sd, 2);
  CHECK(lookahead_var_gaussian(post, far)[0] ==
        doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("tgp look-ahead inflates the effective noise") {
  Rng rng(41);
  TrainingSet data = smooth_data(10, rng, 0.2);
  KernelParams p3 = params_with_nu(1, 1.0, 0.5, 0.3, 3.0);
  TgpPosterior post = make_tgp_posterior(p3, data);

  LookaheadQuery q;
  q.candidate = Eigen::VectorXd::Constant(1, 0.5);
  q.targets = q.candidate.transpose();
  const MeanSd cand = predict_tgp_at(post, q.candidate);
  const double s2 = cand.sd * cand.sd;
  // nu = 3 doubles tau^2 in the denominator
  const double expect = s2 - s2 * s2 / (2.0 * 0.09 + s2);
  CHECK(lookahead_var_tgp(post, q)[0] == doctest::Approx(expect).epsilon(1e-9));
  CHECK(lookahead_var_tgp(post, q)[0] <= s2);

  // large nu recovers the gaussian denominator
  KernelParams pbig = params_with_nu(1, 1.0, 0.5, 0.3, 1e7);
  TgpPosterior postb = make_tgp_posterior(pbig, data);
  const MeanSd candb = predict_tgp_at(postb, q.candidate);
  const double s2b = candb.sd * candb.sd;
  const double gsn = s2b - s2b * s2b / (0.09 + s2b);
  CHECK(lookahead_var_tgp(postb, q)[0] == doctest::Approx(gsn).epsilon(1e-5));
}

TEST_CASE("clgp look-ahead mixture curvature") {
  // at zhat = 0 both branches give 2/pi
  CHECK(clgp_expected_curvature(0.0, 0.7) ==
        doctest::Approx(2.0 / M_PI).epsilon(1e-12));
  for (double z = -5.0; z <= 5.0; z += 0.25)
    CHECK(clgp_expected_curvature(z, 0.5) > 0.0);

  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.0, 0.0);
  p.nu.reset();
  TrainingSet data;
  data.inputs.resize(6, 1);
  data.responses.resize(6);
  for (int i = 0; i < 6; ++i) {
    data.inputs(i, 0) = (i + 0.5) / 6.0;
    data.responses[i] = i < 3 ? 1.0 : -1.0;
  }
  ClgpPosterior post = make_clgp_posterior(p, data);
  LookaheadQuery q;
  q.candidate = Eigen::VectorXd::Constant(1, 0.5);
  q.targets.resize(2, 1);
  q.targets << 0.5, 99.0;
  Eigen::VectorXd ahead = lookahead_var_clgp(post, q);
  const double s2 =
      std::pow(predict_clgp_at(post, q.candidate).sd, 2);
  CHECK(ahead[0] < s2);
  CHECK(ahead[1] == doctest::Approx(1.0).epsilon(1e-9));  // v = 0 far away
}

TEST_CASE("tp look-ahead beta bookkeeping and large-n limit") {
  Rng rng(43);
  TrainingSet data = smooth_data(10, rng, 0.2);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.3, 4.0);
  TPosterior tp = make_tp_posterior(p, data);

  const double beta_check = tp.beta + 4.0 / 2.0;
  CHECK(beta_check > tp.beta);

  LookaheadQuery q;
  q.candidate = Eigen::VectorXd::Constant(1, 0.4);
  q.targets.resize(2, 1);
  q.targets << 0.4, 0.8;
  KernelParams pg = p;
  pg.nu.reset();
  GaussianPosterior gp = make_gaussian_posterior(pg, data);
  const Eigen::VectorXd gsn = lookahead_var_gaussian(gp, q);
  const Eigen::VectorXd tpv = lookahead_var_tp(tp, q);
  const double factor = (4.0 + beta_check - 2.0) / (4.0 + 10.0 - 1.0);
  for (int i = 0; i < 2; ++i)
    CHECK(tpv[i] == doctest::Approx(factor * gsn[i]).epsilon(1e-9));

  // for large n the TP look-ahead converges to the gaussian one
  Rng rng2(47);
  TrainingSet big = smooth_data(1000, rng2, 0.2);
  TPosterior tpb = make_tp_posterior(p, big);
  GaussianPosterior gpb = make_gaussian_posterior(pg, big);
  const double tpl = lookahead_var_tp(tpb, q)[1];
  const double gl = lookahead_var_gaussian(gpb, q)[1];
  CHECK(tpl == doctest::Approx(gl).epsilon(0.1));
}

// ---------------------------------------------------------------- monotone

TEST_CASE("joint kernel blocks") {
  KernelParams p = params_with_nu(2, 1.1, 0.6, 0.1, 0.0);
  p.nu.reset();
  std::vector<VirtualDerivObs> vs;
  Rng rng(53);
  for (int i = 0; i < 5; ++i) {
    VirtualDerivObs v;
    v.location = Eigen::VectorXd::Zero(2);
    v.location << rng.uniform(), rng.uniform();
    v.coordinate = i % 2;
    v.direction = +1;
    v.eta = 1e-6;
    vs.push_back(v);
  }
  Eigen::MatrixXd X(4, 2);
  for (int i = 0; i < 4; ++i) X.row(i) << rng.uniform(), rng.uniform();

  Eigen::MatrixXd K = joint_kernel(X, vs, p);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  // derivative-block diagonal is sigma^2/theta_j^2
  for (int i = 0; i < 5; ++i)
    CHECK(K(i, i) == doctest::Approx(1.1 * 1.1 / (0.6 * 0.6)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-8);

  // cross-covariance of f with the derivative vanishes at zero lag
  VirtualDerivObs v0;
  v0.location = X.row(0).transpose();
  v0.coordinate = 0;
  v0.direction = 1;
  v0.eta = 1e-6;
  Eigen::MatrixXd K2 = joint_kernel(X, {v0}, p);
  CHECK(K2(0, 1) == doctest::Approx(0.0));  // deriv site vs same point
}

TEST_CASE("monotone gp with no virtual points equals the plain gp") {
  Rng rng(59);
  TrainingSet data = smooth_data(12, rng, 0.1);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.2, 0.0);
  p.nu.reset();
  MonotonePosterior mono =
      ep_fit_monotone(data, {}, p, false, {1}, MonotoneOptions{});
  GaussianPosterior gp = make_gaussian_posterior(p, data);
  for (int i = 0; i <= 20; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(1, i / 20.0);
    MeanSd a = predict_monotone_at(mono, x);
    MeanSd b = predict_gaussian_at(gp, x);
    CHECK(std::fabs(a.mean - b.mean) < 1e-10);
    CHECK(std::fabs(a.sd - b.sd) < 1e-10);
  }
}

TEST_CASE("monotone constraints straighten a noisy fit") {
  // increasing truth with heavy noise on a few points
  Rng rng(61);
  const int n = 14;
  TrainingSet data;
  data.inputs.resize(n, 1);
  data.responses.resize(n);
  for (int i = 0; i < n; ++i) {
    data.inputs(i, 0) = (i + 0.5) / n;
    data.responses[i] = 2.0 * data.inputs(i, 0) - 1.0 + 0.25 * rng.normal();
  }
  KernelParams p = params_with_nu(1, 1.0, 0.4, 0.25, 0.0);
  p.nu.reset();

  MonotoneOptions opts;
  opts.directions = {1};
  const double eta = 1e-6 * 2.0;  // response range is ~2

  std::vector<VirtualDerivObs> vs;
  for (int i = 0; i < 8; ++i) {
    VirtualDerivObs v;
    v.location = Eigen::VectorXd::Constant(1, (i + 0.5) / 8.0);
    v.coordinate = 0;
    v.direction = +1;
    v.eta = eta;
    vs.push_back(v);
  }
  MonotonePosterior mono = ep_fit_monotone(data, vs, p, false, {1}, opts);
  CHECK(mono.sites.converged);
  // EP site variances stay positive
  for (Eigen::Index i = 0; i < mono.n_virtual(); ++i)
    CHECK(mono.sites.sigma2_tilde[i] > 0.0);

  // fitted gradient respects the constraint at the virtual points
  for (const auto& v : vs) {
    MeanSd g = predict_monotone_gradient(mono, v.location, 0);
    CHECK(g.mean > -0.05 * 2.0);  // soft monotonicity
  }

  // constrained variance no larger than unconstrained at interior points
  MonotonePosterior uncon =
      ep_fit_monotone(data, {}, p, false, {1}, opts);
  for (double x = 0.1; x < 1.0; x += 0.2) {
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
    CHECK(predict_monotone_at(mono, xv).sd <=
          predict_monotone_at(uncon, xv).sd + 1e-8);
  }

  // a loose constraint (large eta) stays close to the unconstrained fit
  std::vector<VirtualDerivObs> loose = vs;
  for (auto& v : loose) v.eta = 1e6;
  MonotonePosterior ml = ep_fit_monotone(data, loose, p, false, {1}, opts);
  for (double x = 0.1; x < 1.0; x += 0.2) {
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
    CHECK(std::fabs(predict_monotone_at(ml, xv).mean -
                    predict_monotone_at(uncon, xv).mean) < 1e-3);
  }

  // opposing evidence: decreasing data with increasing constraints pulls
  // the gradient up versus the unconstrained fit
  TrainingSet dec = data;
  dec.responses = -data.responses;
  MonotonePosterior mdec = ep_fit_monotone(dec, vs, p, false, {1}, opts);
  MonotonePosterior mdec_free =
      ep_fit_monotone(dec, {}, p, false, {1}, opts);
  Eigen::VectorXd mid = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(predict_monotone_gradient(mdec, mid, 0).mean >
        predict_monotone_gradient(mdec_free, mid, 0).mean);
}

TEST_CASE("virtual point placement") {
  Rng rng(67);
  TrainingSet data = smooth_data(10, rng, 0.05);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.1, 0.0);
  p.nu.reset();
  MonotoneOptions opts;
  opts.directions = {1};
  MonotonePosterior mono = ep_fit_monotone(data, {}, p, false, {1}, opts);

  Eigen::MatrixXd box(1, 2);
  box << 0.0, 1.0;
  CHECK(place_virtual_points(mono, box, 0, opts).empty());

  std::vector<VirtualDerivObs> first = place_virtual_points(mono, box, 5, opts);
  CHECK(first.size() == 5);
  MonotonePosterior with =
      ep_fit_monotone(data, first, p, false, {1}, opts);
  std::vector<VirtualDerivObs> second =
      place_virtual_points(with, box, 5, opts);
  for (const auto& a : second)
    for (const auto& b : first) {
      const bool same = a.coordinate == b.coordinate &&
                        (a.location - b.location).norm() < 1e-12;
      CHECK_FALSE(same);
    }
}

TEST_CASE("monotone look-ahead follows the gaussian ratio") {
  Rng rng(71);
  TrainingSet data = smooth_data(10, rng, 0.1);
  KernelParams p = params_with_nu(1, 1.0, 0.5, 0.2, 0.0);
  p.nu.reset();
  MonotoneOptions opts;
  opts.directions = {1};
  std::vector<VirtualDerivObs> vs;
  VirtualDerivObs v;
  v.location = Eigen::VectorXd::Constant(1, 0.5);
  v.coordinate = 0;
  v.direction = 1;
  v.eta = 1e-6;
  vs.push_back(v);
  MonotonePosterior mono = ep_fit_monotone(data, vs, p, false, {1}, opts);

  Eigen::VectorXd xn = Eigen::VectorXd::Constant(1, 0.35);
  Eigen::MatrixXd targets(3, 1);
  targets << 0.35, 0.7, 55.0;
  Eigen::VectorXd ahead = lookahead_var_monotone(mono, xn, targets);
  const double s2 = std::pow(predict_monotone_at(mono, xn).sd, 2);
  CHECK(ahead[0] ==
        doctest::Approx(s2 * 0.04 / (0.04 + s2)).epsilon(1e-9));
  CHECK(ahead[1] <= std::pow(predict_monotone_at(
                        mono, targets.row(1).transpose()).sd, 2) + 1e-12);
  CHECK(ahead[2] == doctest::Approx(1.0).epsilon(1e-9));
}

// ---------------------------------------------------------------- facade

TEST_CASE("surrogate facade agrees with the underlying models") {
  Rng rng(73);
  TrainingSet data = smooth_data(16, rng, 0.15);
  FitOptions opts;
  opts.bounds = ParamBounds::for_data(data, Eigen::VectorXd::Ones(1));
  opts.restarts = 2;

  for (SurrogateKind kind :
       {SurrogateKind::gp, SurrogateKind::tgp, SurrogateKind::clgp,
        SurrogateKind::tp, SurrogateKind::mgp}) {
    opts.kind = kind;
    Rng fit_rng(79);
    Surrogate s = Surrogate::fit(data, opts, fit_rng);

    Eigen::MatrixXd grid(9, 1);
    for (int i = 0; i < 9; ++i) grid(i, 0) = (i + 0.5) / 9.0;
    GridEval ge = s.prepare_grid(grid);
    Eigen::VectorXd cand = Eigen::VectorXd::Constant(1, 0.37);
    Eigen::VectorXd fast = ge.lookahead_sd(cand);
    for (int i = 0; i < 9; ++i) {
      MeanSd ms = s.at(grid.row(i).transpose());
      CHECK(ge.mean()[i] == doctest::Approx(ms.mean).epsilon(1e-10));
      CHECK(ge.sd()[i] == doctest::Approx(ms.sd).epsilon(1e-10));
      CHECK(fast[i] == doctest::Approx(
                           s.lookahead_sd(grid.row(i).transpose(), cand))
                           .epsilon(1e-9));
    }

    // updating keeps the state usable; Gaussian-flavored variance shrinks
    // (the t-GP/TP variance is data-dependent and may move either way)
    const double before = s.at(cand).sd;
    Surrogate s2 = s.with_observation(cand, 0.1);
    CHECK(s2.n() == s.n() + 1);
    CHECK(s2.at(cand).sd > 0.0);
    if (kind == SurrogateKind::gp || kind == SurrogateKind::mgp)
      CHECK(s2.at(cand).sd < before + 1e-12);
  }
}

TEST_CASE("tp facade uses student tails") {
  Rng rng(83);
  TrainingSet data = smooth_data(12, rng, 0.2);
  FitOptions opts;
  opts.kind = SurrogateKind::tp;
  opts.bounds = ParamBounds::for_data(data, Eigen::VectorXd::Ones(1));
  opts.restarts = 1;
  Rng fit_rng(89);
  Surrogate s = Surrogate::fit(data, opts, fit_rng);
  const double dof = *s.params().nu + static_cast<double>(s.n());
  CHECK(s.tail_cdf(1.3) == doctest::Approx(stats::t_cdf(1.3, dof)));
  CHECK(s.band_quantile(0.975) ==
        doctest::Approx(stats::t_quantile(0.975, dof)));

  opts.kind = SurrogateKind::gp;
  Rng fr2(97);
  Surrogate g = Surrogate::fit(data, opts, fr2);
  CHECK(g.tail_cdf(1.3) == doctest::Approx(stats::norm_cdf(1.3)));
}
