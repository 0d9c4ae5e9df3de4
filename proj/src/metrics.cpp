#include "lse/metrics.hpp"

#include <cmath>
#include <limits>

#include "lse/sobol.hpp"
#include "lse/stats.hpp"

namespace lse {

TestSet build_test_set_grid1d(int M, double lo, double hi) {
  TestSet ts;
  ts.points.resize(M, 1);
  for (int i = 0; i < M; ++i)
    ts.points(i, 0) = lo + (hi - lo) * (i + 0.5) / M;
  ts.weights = Eigen::VectorXd::Constant(M, 1.0 / M);
  return ts;
}

namespace {

Eigen::MatrixXd sobol_in_domain(const DomainSpec& domain, int n,
                                std::uint64_t seed) {
  Sobol sob(domain.dim(), seed | 1ull);
  Eigen::MatrixXd out(n, domain.dim());
  int got = 0, guard = 0;
  while (got < n && guard < 256 * n) {
    Eigen::VectorXd u = sob.next();
    ++guard;
    Eigen::VectorXd x(domain.dim());
    for (int i = 0; i < domain.dim(); ++i)
      x[i] = domain.box(i, 0) + (domain.box(i, 1) - domain.box(i, 0)) * u[i];
    if (domain.contains(x)) out.row(got++) = x.transpose();
  }
  if (got < n) throw std::invalid_argument("test set: domain too thin");
  return out;
}

}  // namespace

TestSet build_test_set(
    const std::function<double(const Eigen::VectorXd&)>& truth,
    const DomainSpec& domain, int M, bool stratified, std::uint64_t seed) {
  TestSet ts;
  if (!stratified) {
    ts.points = sobol_in_domain(domain, M, seed);
    ts.weights = Eigen::VectorXd::Constant(M, 1.0 / M);
    return ts;
  }

  const int pool_n = std::max(20 * M, 4096);
  Eigen::MatrixXd pool = sobol_in_domain(domain, pool_n, seed);
  Eigen::VectorXd f(pool_n);
  for (int i = 0; i < pool_n; ++i) f[i] = truth(pool.row(i).transpose());
  const double range = f.maxCoeff() - f.minCoeff();
  const double near_radius = 0.1 * range;

  const int m1 = static_cast<int>(0.8 * M);
  const int m2 = M - m1;
  std::vector<int> near, far;
  for (int i = 0; i < pool_n; ++i)
    (std::fabs(f[i]) <= near_radius ? near : far).push_back(i);
  if (static_cast<int>(near.size()) < m1 ||
      static_cast<int>(far.size()) < m2) {
    // near stratum too thin: plain equal-weight fallback
    ts.points = pool.topRows(M);
    ts.weights = Eigen::VectorXd::Constant(M, 1.0 / M);
    return ts;
  }

  ts.points.resize(M, domain.dim());
  ts.weights.resize(M);
  ts.near_mask.assign(M, 0);
  const double p_c = 0.4;
  for (int i = 0; i < m1; ++i) {
    ts.points.row(i) = pool.row(near[i]);
    ts.weights[i] = p_c / m1;
    ts.near_mask[i] = 1;
  }
  for (int i = 0; i < m2; ++i) {
    ts.points.row(m1 + i) = pool.row(far[i]);
    ts.weights[m1 + i] = (1.0 - p_c) / m2;
  }
  return ts;
}

TestSet build_test_set_weighted(
    const DomainSpec& domain, int M,
    const std::function<double(const Eigen::VectorXd&)>& density,
    std::uint64_t seed) {
  TestSet ts;
  ts.points = sobol_in_domain(domain, M, seed);
  ts.weights.resize(M);
  for (int i = 0; i < M; ++i)
    ts.weights[i] = std::max(density(ts.points.row(i).transpose()), 0.0);
  const double total = ts.weights.sum();
  if (total > 0.0)
    ts.weights /= total;
  else
    ts.weights.setConstant(1.0 / M);
  return ts;
}

double error_rate(const Eigen::VectorXd& f_true, const Eigen::VectorXd& f_hat,
                  const Eigen::VectorXd& weights) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f_true.size(); ++i) {
    const bool s1 = f_true[i] >= 0.0, s2 = f_hat[i] >= 0.0;
    if (s1 != s2) acc += weights[i];
  }
  return acc;
}

double bias_metric(const Eigen::VectorXd& f_true, const Eigen::VectorXd& f_hat,
                   const Eigen::VectorXd& weights) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f_true.size(); ++i) {
    if (f_hat[i] < 0.0 && f_true[i] >= 0.0)
      acc += weights[i];  // S \ S-hat
    else if (f_hat[i] >= 0.0 && f_true[i] < 0.0)
      acc -= weights[i];  // S-hat \ S
  }
  return acc;
}

double local_empirical_error(double mean, double sd, const TailCdf& cdf) {
  if (sd <= 0.0) return mean == 0.0 ? 0.5 : 0.0;
  return cdf(-std::fabs(mean) / sd);
}

double empirical_error(const Eigen::VectorXd& means, const Eigen::VectorXd& sds,
                       const Eigen::VectorXd& weights, const TailCdf& cdf) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i)
    acc += local_empirical_error(means[i], sds[i], cdf) * weights[i];
  return acc;
}

double credible_band_volume(const Eigen::VectorXd& means,
                            const Eigen::VectorXd& sds,
                            const Eigen::VectorXd& weights, double alpha,
                            double band_quantile) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const double lo = means[i] - band_quantile * sds[i];
    const double hi = means[i] + band_quantile * sds[i];
    if (lo * hi < 0.0) acc += weights[i];
  }
  (void)alpha;
  return acc;
}

namespace {

double soft_set_mass(const Eigen::VectorXd& means, const Eigen::VectorXd& sds,
                     const Eigen::VectorXd& weights, double z) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i)
    if (means[i] - z * sds[i] >= 0.0) acc += weights[i];
  return acc;
}

}  // namespace

double vorobev_deviation(const Eigen::VectorXd& means,
                         const Eigen::VectorXd& sds,
                         const Eigen::VectorXd& weights, double alpha,
                         const TailCdf& cdf,
                         const std::function<double(double)>& quantile) {
  const double z = alpha >= 1.0 ? 0.0 : quantile(1.0 - 0.5 * alpha);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const double pv =
        sds[i] > 0.0 ? cdf(means[i] / sds[i]) : (means[i] >= 0.0 ? 1.0 : 0.0);
    if (means[i] - z * sds[i] >= 0.0)
      acc += (1.0 - pv) * weights[i];
    else
      acc += pv * weights[i];
  }
  return acc;
}

double vorobev_threshold(const Eigen::VectorXd& means,
                         const Eigen::VectorXd& sds,
                         const Eigen::VectorXd& weights, const TailCdf& cdf,
                         const std::function<double(double)>& quantile) {
  double target = 0.0;
  for (Eigen::Index i = 0; i < means.size(); ++i) {
    const double pv =
        sds[i] > 0.0 ? cdf(means[i] / sds[i]) : (means[i] >= 0.0 ? 1.0 : 0.0);
    target += pv * weights[i];
  }
  // mass of S-hat^alpha grows with alpha; bisection on alpha
  double lo = 1e-8, hi = 1.0;
  auto mass_at = [&](double alpha) {
    const double z = alpha >= 1.0 ? 0.0 : quantile(1.0 - 0.5 * alpha);
    return soft_set_mass(means, sds, weights, z);
  };
  if (mass_at(hi) <= target) return hi;
  if (mass_at(lo) >= target) return lo;
  for (int it = 0; it < 60 && hi - lo > 1e-4; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mass_at(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double local_empirical_error(const Surrogate& s, const Eigen::VectorXd& x) {
  const MeanSd ms = s.at(x);
  return local_empirical_error(ms.mean, ms.sd,
                               [&s](double u) { return s.tail_cdf(u); });
}

MetricRow evaluate_metrics(
    const std::function<double(const Eigen::VectorXd&)>* truth,
    const Surrogate& s, const GridEval& grid, const TestSet& testset,
    double alpha) {
  MetricRow row;
  const TailCdf cdf = [&s](double u) { return s.tail_cdf(u); };
  row.empirical_error =
      empirical_error(grid.mean(), grid.sd(), testset.weights, cdf);
  row.ci_volume =
      credible_band_volume(grid.mean(), grid.sd(), testset.weights, alpha,
                           s.band_quantile(1.0 - 0.5 * alpha));
  if (truth) {
    Eigen::VectorXd f_true(testset.size());
    for (Eigen::Index i = 0; i < testset.size(); ++i)
      f_true[i] = (*truth)(testset.points.row(i).transpose());
    row.error_rate = error_rate(f_true, grid.mean(), testset.weights);
    row.bias = bias_metric(f_true, grid.mean(), testset.weights);
  } else {
    row.error_rate = std::numeric_limits<double>::quiet_NaN();
    row.bias = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

Eigen::VectorXd grid_means_serial(const Surrogate& s, const TestSet& testset) {
  Eigen::VectorXd out(testset.size());
  for (Eigen::Index i = 0; i < testset.size(); ++i)
    out[i] = s.at(testset.points.row(i).transpose()).mean;
  return out;
}

}  // namespace lse
