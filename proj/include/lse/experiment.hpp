#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lse/acquisition.hpp"
#include "lse/metrics.hpp"
#include "lse/synthetic.hpp"

namespace lse {

// Hyperparameters are re-estimated on the doubling schedule
// n0+1, n0+2, n0+4, n0+8, ...; otherwise the new sample is assimilated
// with frozen hyperparameters.
struct RefitSchedule {
  int n0 = 0;
  bool should_refit(int new_size) const {
    const int k = new_size - n0;
    return k >= 1 && (k & (k - 1)) == 0;
  }
};

struct ExperimentConfig {
  std::string function = "quadratic1d";
  NoiseKind noise = NoiseKind::t_small;
  SurrogateKind surrogate = SurrogateKind::gp;
  AcquisitionKind acquisition = AcquisitionKind::tmse;
  int n0 = -1;      // default 10 d
  int budget = -1;  // default 100/150/1000 by dimension
  int test_m = -1;  // default 1000/500/1000 by dimension
  int runs = 20;
  std::uint64_t seed = 1;
  int restarts = 5;
  std::optional<double> gamma;  // fixed MCU weight
  double ci_alpha = 0.05;
  GaOptions ga;

  void resolve_defaults();
};

struct StepRecord {
  int n = 0;
  MetricRow metrics;
  Eigen::VectorXd x;  // empty for the initial-design row
  double y = 0.0;
  double wall_s = 0.0;
};

struct RunTrace {
  int run_index = 0;
  std::uint64_t run_seed = 0;
  std::vector<StepRecord> steps;
  Eigen::MatrixXd initial_design;
  bool aborted = false;
  std::string abort_reason;

  const StepRecord& final_step() const { return steps.back(); }
};

RunTrace run_sequential(const ExperimentConfig& config, int run_index);

struct MacroSummary {
  std::vector<RunTrace> traces;
  double mean_er = 0.0, sd_er = 0.0;
  double mean_ee = 0.0, sd_ee = 0.0;
  double mean_bias = 0.0, mean_ci = 0.0;
};

// Macro-runs execute in parallel; run k's seed and initial design depend
// only on (master seed, k), so they are shared across surrogate and
// acquisition choices.
MacroSummary macroreplicate(const ExperimentConfig& config);

// Median metric curves over runs (step-indexed).
struct MedianCurves {
  std::vector<int> steps;
  std::vector<double> er, ee;
};
MedianCurves median_curves(const std::vector<RunTrace>& traces);

}  // namespace lse
