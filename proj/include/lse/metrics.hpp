#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lse/acquisition.hpp"
#include "lse/surrogate.hpp"

namespace lse {

// Weighted evaluation grid; near_mask flags the stratum hugging the
// zero contour when the stratified builder was used.
struct TestSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;  // nonnegative, sums to 1
  std::vector<std::uint8_t> near_mask;

  Eigen::Index size() const { return points.rows(); }
};

// Equispaced 1-D grid with equal weights.
TestSet build_test_set_grid1d(int M, double lo = 0.0, double hi = 1.0);

// Scrambled-Sobol test set. In stratified mode, 0.8M points come from
// the near-contour stratum |f| <= 0.1 range(f) and carry total mass 0.4
// (so individual near points are down-weighted); plain mode is equal
// weights. Falls back to plain when the near stratum is empty.
TestSet build_test_set(const std::function<double(const Eigen::VectorXd&)>& truth,
                       const DomainSpec& domain, int M, bool stratified,
                       std::uint64_t seed);

// Sobol points weighted by an unnormalized density over the domain.
TestSet build_test_set_weighted(
    const DomainSpec& domain, int M,
    const std::function<double(const Eigen::VectorXd&)>& density,
    std::uint64_t seed);

// --- vector-level metric kernels (weights must sum to 1) ---

double error_rate(const Eigen::VectorXd& f_true, const Eigen::VectorXd& f_hat,
                  const Eigen::VectorXd& weights);
double bias_metric(const Eigen::VectorXd& f_true, const Eigen::VectorXd& f_hat,
                   const Eigen::VectorXd& weights);

using TailCdf = std::function<double(double)>;

double local_empirical_error(double mean, double sd, const TailCdf& cdf);
double empirical_error(const Eigen::VectorXd& means, const Eigen::VectorXd& sds,
                       const Eigen::VectorXd& weights, const TailCdf& cdf);
double credible_band_volume(const Eigen::VectorXd& means,
                            const Eigen::VectorXd& sds,
                            const Eigen::VectorXd& weights, double alpha,
                            double band_quantile);
double vorobev_deviation(const Eigen::VectorXd& means,
                         const Eigen::VectorXd& sds,
                         const Eigen::VectorXd& weights, double alpha,
                         const TailCdf& cdf,
                         const std::function<double(double)>& quantile);
double vorobev_threshold(const Eigen::VectorXd& means,
                         const Eigen::VectorXd& sds,
                         const Eigen::VectorXd& weights, const TailCdf& cdf,
                         const std::function<double(double)>& quantile);

// --- surrogate-level wrappers ---

struct MetricRow {
  double error_rate = 0.0;      // needs ground truth; NaN otherwise
  double empirical_error = 0.0;
  double bias = 0.0;            // needs ground truth; NaN otherwise
  double ci_volume = 0.0;
};

double local_empirical_error(const Surrogate& s, const Eigen::VectorXd& x);

// One pass over the test set given precomputed grid caches.
MetricRow evaluate_metrics(
    const std::function<double(const Eigen::VectorXd&)>* truth,
    const Surrogate& s, const GridEval& grid, const TestSet& testset,
    double alpha = 0.05);

// Serial reference twin of the batched test-set evaluation.
Eigen::VectorXd grid_means_serial(const Surrogate& s, const TestSet& testset);

}  // namespace lse
