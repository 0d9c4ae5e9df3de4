#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "lse/gp.hpp"
#include "lse/kernel.hpp"
#include "lse/optim.hpp"
#include "lse/parallel.hpp"
#include "lse/rng.hpp"
#include "lse/sobol.hpp"
#include "lse/stats.hpp"

using namespace lse;

namespace {

TrainingSet make_noisy_data(int n, int d, Rng& rng, double noise_sd = 0.1) {
  TrainingSet data;
  data.inputs.resize(n, d);
  data.responses.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.inputs(i, j) = rng.uniform();
    double f = std::sin(3.0 * data.inputs(i, 0));
    data.responses[i] = f + noise_sd * rng.normal();
  }
  return data;
}

KernelParams simple_params(int d, double sigma = 1.0, double theta = 1.0,
                           double tau = 1.0) {
  KernelParams p;
  p.sigma_se = sigma;
  p.theta = Eigen::VectorXd::Constant(d, theta);
  p.tau = tau;
  return p;
}

}  // namespace

TEST_CASE("normal cdf/quantile round trip") {
  CHECK(stats::norm_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::norm_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
  CHECK(stats::norm_quantile(0.975) ==
        doctest::Approx(1.959963985).epsilon(1e-9));
  for (double p : {0.001, 0.2, 0.5, 0.77, 0.9999}) {
    CHECK(stats::norm_cdf(stats::norm_quantile(p)) ==
          doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("student t cdf and quantile") {
  CHECK(stats::t_cdf(0.0, 3.0) == doctest::Approx(0.5));
  // classical table value: t_{3,0.975} = 3.182446
  CHECK(stats::t_quantile(0.975, 3.0) ==
        doctest::Approx(3.182446).epsilon(1e-5));
  CHECK(stats::t_survival(1.96, 3.0) > 1.0 - stats::norm_cdf(1.96));
  // large nu approaches the normal
  CHECK(stats::t_cdf(1.0, 1e6) == doctest::Approx(stats::norm_cdf(1.0)).epsilon(1e-5));
}

TEST_CASE("rng moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.01));

  double ts = 0.0, ts2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = rng.student_t(5.0);
    ts += t;
    ts2 += t * t;
  }
  // Var of t_5 = 5/3
  CHECK(std::fabs(ts / n) < 0.02);
  CHECK(ts2 / n == doctest::Approx(5.0 / 3.0).epsilon(0.05));

  double gs = 0.0;
  for (int i = 0; i < n; ++i) gs += rng.gamma(2.5);
  CHECK(gs / n == doctest::Approx(2.5).epsilon(0.02));
}

TEST_CASE("sobol stratification and determinism") {
  Sobol s(2, 77);  // digital shift keeps the net balance
  Eigen::MatrixXd pts = s.sample(256);
  // Counts in each of 16 bins per axis must be exactly balanced for a
  // power-of-two sample of a correct Sobol sequence.
  for (int dim = 0; dim < 2; ++dim) {
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(16);
    for (int i = 0; i < 256; ++i) {
      int b = static_cast<int>(pts(i, dim) * 16.0);
      REQUIRE(b >= 0);
      REQUIRE(b < 16);
      counts[b]++;
    }
    for (int b = 0; b < 16; ++b) CHECK(counts[b] == 16);
  }
  Sobol s2(2, 99), s3(2, 99);
  CHECK(s2.sample(16) == s3.sample(16));
  Sobol s6(6, 5);
  Eigen::MatrixXd p6 = s6.sample(128);
  CHECK(p6.minCoeff() >= 0.0);
  CHECK(p6.maxCoeff() < 1.0);
  for (int dim = 0; dim < 6; ++dim) {
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(8);
    for (int i = 0; i < 128; ++i) counts[static_cast<int>(p6(i, dim) * 8.0)]++;
    for (int b = 0; b < 8; ++b) CHECK(counts[b] == 16);
  }
}

TEST_CASE("lhs places one point per stratum") {
  Rng rng(7);
  const int n = 10;
  Eigen::MatrixXd X = lhs_unit(n, 1, rng);
  std::vector<int> hit(n, 0);
  for (int i = 0; i < n; ++i) hit[static_cast<int>(X(i, 0) * n)]++;
  for (int k = 0; k < n; ++k) CHECK(hit[k] == 1);

  Rng r1(11), r2(11);
  CHECK(lhs_unit(8, 3, r1) == lhs_unit(8, 3, r2));
}

TEST_CASE("se kernel basics") {
  KernelParams p = simple_params(2, 1.3, 0.7, 0.0);
  Eigen::VectorXd x(2), y(2);
  x << 0.2, 0.4;
  y << 0.9, 0.1;
  CHECK(se_kernel(x, x, p) == doctest::Approx(1.3 * 1.3));
  CHECK(se_kernel(x, y, p) == doctest::Approx(se_kernel(y, x, p)));
  CHECK(se_kernel(x, y, p) <= 1.3 * 1.3);

  KernelParams p1 = simple_params(1);
  Eigen::VectorXd a(1), b(1);
  a << 0.0;
  b << 1.0;
  CHECK(se_kernel(a, b, p1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(se_kernel(a, bad, p1), std::invalid_argument);
}

TEST_CASE("kernel matrix is symmetric PSD") {
  Rng rng(3);
  Eigen::MatrixXd X(5, 2);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 2; ++j) X(i, j) = rng.uniform();
  KernelParams p = simple_params(2, 0.9, 0.5);
  Eigen::MatrixXd K = kernel_matrix(X, p);
  CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  for (int i = 0; i < 5; ++i) CHECK(K(i, i) == doctest::Approx(0.81));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);

  Eigen::MatrixXd X1(1, 2);
  X1 << 0.5, 0.5;
  Eigen::MatrixXd K1 = kernel_matrix(X1, p);
  CHECK(K1(0, 0) == doctest::Approx(0.81));

  Eigen::MatrixXd Xdup(2, 2);
  Xdup << 0.3, 0.3, 0.3, 0.3;
  Eigen::MatrixXd Kd = kernel_matrix(Xdup, p);
  CHECK(Kd(0, 1) == doctest::Approx(0.81));
}

TEST_CASE("se kernel derivatives match finite differences") {
  KernelParams p = simple_params(2, 1.1, 0.6);
  Eigen::VectorXd x(2), y(2);
  x << 0.3, 0.8;
  y << 0.55, 0.2;
  const double h = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const double fd = (se_kernel(xp, y, p) - se_kernel(xm, y, p)) / (2 * h);
    CHECK(se_kernel_dx(x, y, j, p) == doctest::Approx(fd).epsilon(1e-6));
  }
  for (int j = 0; j < 2; ++j)
    for (int j2 = 0; j2 < 2; ++j2) {
      Eigen::VectorXd yp = y, ym = y;
      yp[j2] += h;
      ym[j2] -= h;
      const double fd =
          (se_kernel_dx(x, yp, j, p) - se_kernel_dx(x, ym, j, p)) / (2 * h);
      CHECK(se_kernel_dxdx2(x, y, j, j2, p) ==
            doctest::Approx(fd).epsilon(1e-5));
    }
  // at zero lag the first derivative vanishes and the second is s2/theta^2
  CHECK(se_kernel_dx(x, x, 0, p) == doctest::Approx(0.0));
  CHECK(se_kernel_dxdx2(x, x, 1, 1, p) ==
        doctest::Approx(1.1 * 1.1 / (0.6 * 0.6)));
}

TEST_CASE("log marginal likelihood closed forms") {
  // single point, sigma=theta=tau=1, y=0: log N(0; 0, 2)
  TrainingSet data;
  data.inputs = Eigen::MatrixXd::Zero(1, 1);
  data.responses = Eigen::VectorXd::Zero(1);
  KernelParams p = simple_params(1);
  CHECK(log_marginal_likelihood(p, data) ==
        doctest::Approx(-0.5 * std::log(4.0 * M_PI)).epsilon(1e-7));
}

TEST_CASE("log marginal likelihood dense oracle and permutation") {
  Rng rng(17);
  TrainingSet data = make_noisy_data(14, 2, rng);
  KernelParams p = simple_params(2, 0.8, 0.6, 0.3);

  // dense-solver oracle
  Eigen::MatrixXd C = kernel_matrix(data.inputs, p);
  C.diagonal().array() += p.tau * p.tau;
  Eigen::MatrixXd Cj = C;
  Cj.diagonal().array() += 1e-8 * p.sigma_se * p.sigma_se;
  const double quad = data.responses.dot(Cj.inverse() * data.responses);
  const double logdet = std::log(Cj.determinant());
  const double oracle =
      -0.5 * quad - 0.5 * logdet - 0.5 * 14.0 * std::log(2.0 * M_PI);
  CHECK(log_marginal_likelihood(p, data) ==
        doctest::Approx(oracle).epsilon(1e-8));

  // permuting the pairs leaves the value unchanged
  TrainingSet perm = data;
  std::vector<int> idx = {3, 1, 0, 2, 5, 4, 7, 6, 13, 12, 11, 10, 9, 8};
  for (int i = 0; i < 14; ++i) {
    perm.inputs.row(i) = data.inputs.row(idx[i]);
    perm.responses[i] = data.responses[idx[i]];
  }
  CHECK(log_marginal_likelihood(p, perm) ==
        doctest::Approx(log_marginal_likelihood(p, data)).epsilon(1e-10));
}

TEST_CASE("analytic lml gradient matches finite differences") {
  Rng rng(19);
  TrainingSet data = make_noisy_data(10, 2, rng);
  KernelParams p = simple_params(2, 0.9, 0.7, 0.25);
  Eigen::VectorXd grad;
  log_marginal_likelihood_grad(p, data, &grad);

  auto at_logp = [&](const Eigen::VectorXd& logp) {
    KernelParams q = p;
    q.sigma_se = std::exp(logp[0]);
    q.theta = logp.segment(1, 2).array().exp();
    q.tau = std::exp(logp[3]);
    return log_marginal_likelihood(q, data);
  };
  Eigen::VectorXd logp(4);
  logp << std::log(p.sigma_se), std::log(p.theta[0]), std::log(p.theta[1]),
      std::log(p.tau);
  Eigen::VectorXd fd = fd_gradient(at_logp, logp, 1e-6);
  for (int i = 0; i < 4; ++i)
    CHECK(grad[i] == doctest::Approx(fd[i]).epsilon(1e-4));
}

TEST_CASE("gaussian gp predicts closed form on one point") {
  TrainingSet data;
  data.inputs = Eigen::MatrixXd::Zero(1, 1);
  data.responses = Eigen::VectorXd::Ones(1);
  GaussianPosterior post = make_gaussian_posterior(simple_params(1), data);
  MeanSd ms = predict_gaussian_at(post, Eigen::VectorXd::Zero(1));
  CHECK(ms.mean == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(ms.sd * ms.sd == doctest::Approx(0.5).epsilon(1e-7));

  // far from data: prior reversion
  Eigen::VectorXd far = Eigen::VectorXd::Constant(1, 50.0);
  MeanSd msf = predict_gaussian_at(post, far);
  CHECK(msf.mean == doctest::Approx(0.0));
  CHECK(msf.sd == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("duplicated prediction rows agree") {
  Rng rng(23);
  TrainingSet data = make_noisy_data(12, 1, rng);
  GaussianPosterior post =
      make_gaussian_posterior(simple_params(1, 1.0, 0.5, 0.2), data);
  Eigen::MatrixXd Xs(2, 1);
  Xs << 0.4, 0.4;
  Prediction pred = predict_gaussian(post, Xs);
  CHECK(pred.mean[0] == doctest::Approx(pred.mean[1]));
  CHECK(pred.cov(0, 0) == doctest::Approx(pred.cov(1, 1)).epsilon(1e-10));
}

TEST_CASE("posterior variance bounded by prior and shrinks with data") {
  Rng rng(29);
  TrainingSet data = make_noisy_data(20, 2, rng);
  KernelParams p = simple_params(2, 1.2, 0.6, 0.3);
  GaussianPosterior post = make_gaussian_posterior(p, data);
  Rng probe(31);
  GaussianPosterior bigger = update_gaussian(
      post, Eigen::VectorXd::Constant(2, 0.5), 0.3);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(2);
    x << probe.uniform(), probe.uniform();
    const double s2 = predict_gaussian_at(post, x).sd;
    CHECK(s2 * s2 <= p.sigma_se * p.sigma_se + 1e-10);
    const double s2b = predict_gaussian_at(bigger, x).sd;
    CHECK(s2b * s2b <= s2 * s2 + 1e-10);
  }
}

TEST_CASE("interpolation at zero noise") {
  // well-separated grid keeps conditioning sane at tau = 0
  const int n = 6;
  TrainingSet data;
  data.inputs.resize(n, 1);
  data.responses.resize(n);
  for (int i = 0; i < n; ++i) {
    data.inputs(i, 0) = (i + 0.5) / n;
    data.responses[i] = std::sin(3.0 * data.inputs(i, 0));
  }
  KernelParams p = simple_params(1, 1.0, 0.25, 0.0);
  GaussianPosterior post = make_gaussian_posterior(p, data);
  for (int i = 0; i < n; ++i) {
    MeanSd ms = predict_gaussian_at(post, data.inputs.row(i).transpose());
    CHECK(ms.mean == doctest::Approx(data.responses[i]).epsilon(1e-6));
  }
}

TEST_CASE("update matches refit") {
  Rng rng(41);
  TrainingSet data = make_noisy_data(15, 2, rng);
  KernelParams p = simple_params(2, 1.0, 0.7, 0.4);
  GaussianPosterior post = make_gaussian_posterior(p, data);

  Eigen::VectorXd xn(2);
  xn << 0.33, 0.77;
  GaussianPosterior upd = update_gaussian(post, xn, -0.2);
  GaussianPosterior ref =
      make_gaussian_posterior(p, data.appended(xn, -0.2));

  Rng probe(43);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x(2);
    x << probe.uniform(), probe.uniform();
    MeanSd a = predict_gaussian_at(upd, x);
    MeanSd b = predict_gaussian_at(ref, x);
    CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-8));
    CHECK(a.sd == doctest::Approx(b.sd).epsilon(1e-8));
  }

  // duplicating an existing input shrinks its variance
  Eigen::VectorXd x0 = data.inputs.row(0).transpose();
  const double before = predict_gaussian_at(post, x0).sd;
  GaussianPosterior dup = update_gaussian(post, x0, data.responses[0]);
  CHECK(predict_gaussian_at(dup, x0).sd < before);

  // ten sequential updates equal one batch fit
  GaussianPosterior seq = post;
  TrainingSet batch = data;
  Rng extra(47);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(2);
    x << extra.uniform(), extra.uniform();
    const double y = extra.normal();
    seq = update_gaussian(seq, x, y);
    batch = batch.appended(x, y);
  }
  GaussianPosterior full = make_gaussian_posterior(p, batch);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x(2);
    x << probe.uniform(), probe.uniform();
    CHECK(predict_gaussian_at(seq, x).mean ==
          doctest::Approx(predict_gaussian_at(full, x).mean).epsilon(1e-6));
    CHECK(predict_gaussian_at(seq, x).sd ==
          doctest::Approx(predict_gaussian_at(full, x).sd).epsilon(1e-6));
  }
}

TEST_CASE("ml fit recovers lengthscale and respects restarts") {
  Rng rng(53);
  // draw a function with a known lengthscale from the prior on a grid
  const int n = 120;
  TrainingSet data;
  data.inputs.resize(n, 1);
  for (int i = 0; i < n; ++i) data.inputs(i, 0) = (i + 0.5) / n;
  KernelParams truth = simple_params(1, 1.0, 0.6, 0.05);
  Eigen::MatrixXd K = kernel_matrix(data.inputs, truth);
  K.diagonal().array() += 1e-10;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = rng.normal();
  Eigen::VectorXd f = llt.matrixL() * z;
  data.responses.resize(n);
  for (int i = 0; i < n; ++i) data.responses[i] = f[i] + 0.05 * rng.normal();

  ParamBounds bounds = ParamBounds::for_data(data, Eigen::VectorXd::Ones(1));
  Rng fit_rng(59);
  GaussianPosterior post = fit_gaussian_gp(data, bounds, 3, fit_rng);
  CHECK(post.params.theta[0] > 0.3);
  CHECK(post.params.theta[0] < 1.2);

  // restarts superset property: the first start is shared
  Rng r1(61), r5(61);
  GaussianPosterior p1 = fit_gaussian_gp(data, bounds, 1, r1);
  GaussianPosterior p5 = fit_gaussian_gp(data, bounds, 5, r5);
  CHECK(log_marginal_likelihood(p5.params, data) >=
        log_marginal_likelihood(p1.params, data) - 1e-9);

  // degenerate duplicate inputs do not crash (jitter path)
  TrainingSet dup;
  dup.inputs = Eigen::MatrixXd::Constant(2, 1, 0.5);
  dup.responses = Eigen::VectorXd::Constant(2, 0.1);
  KernelParams pdup = simple_params(1, 1.0, 0.5, 1e-3);
  CHECK_NOTHROW(make_gaussian_posterior(pdup, dup));
}

TEST_CASE("parallel_for matches serial_for bitwise") {
  const int n = 1000;
  Eigen::VectorXd a(n), b(n);
  auto work = [&](Eigen::VectorXd& out) {
    return [&out](std::size_t i) {
      double acc = 0.0;
      for (int k = 1; k <= 50; ++k)
        acc += std::sin(static_cast<double>(i) * 0.01 * k);
      out[static_cast<Eigen::Index>(i)] = acc;
    };
  };
  par::parallel_for(n, work(a));
  par::serial_for(n, work(b));
  CHECK(a == b);
}
