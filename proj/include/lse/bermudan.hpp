#pragma once

#include <string>
#include <vector>

#include "lse/acquisition.hpp"
#include "lse/surrogate.hpp"

namespace lse {

struct MarketModel {
  int d = 2;
  double rate = 0.06;
  double dividend = 0.0;
  double sigma = 0.2;
  double dt = 0.04;
  double maturity = 1.0;
  Eigen::VectorXd x0;

  int steps() const {
    return static_cast<int>(std::lround(maturity / dt));
  }
  double time_at(int k) const { return k * dt; }
};

enum class PayoffKind { basket_put, max_call };

PayoffKind payoff_kind_from_string(const std::string& s);
std::string to_string(PayoffKind k);

// Exercise payoff discounted to time zero.
struct Payoff {
  PayoffKind kind = PayoffKind::basket_put;
  double strike = 40.0;
  double rate = 0.06;

  double operator()(double t, const Eigen::VectorXd& x) const;
};

// One exercise-interval move of the log-normal asset vector with
// independent coordinates.
Eigen::VectorXd gbm_step(const Eigen::VectorXd& x, const MarketModel& model,
                         Rng& rng);

// Interest region for stage fitting: payoff-positive truncation of the
// price box.
DomainSpec bermudan_domain(PayoffKind kind, double strike, int d);

// Log-normal density of X_t given X_0 = x0 (the mu weighting measure).
double lognormal_density(const Eigen::VectorXd& x, const MarketModel& model,
                         double t);

// Per-stage stopping rule built backward from maturity. Stage k covers
// exercise time k*dt, k = 1..steps-1; maturity exercises whenever the
// payoff is positive.
struct ExercisePolicy {
  MarketModel model;
  Payoff payoff;
  DomainSpec domain;
  std::vector<Surrogate> stages;  // index k-1 holds the stage-k surrogate
  std::vector<bool> stage_ok;     // false = continue everywhere

  bool exercise(int k, const Eigen::VectorXd& x) const;
};

// One noisy draw of the timing value C(t_k, x) - h(t_k, x): simulate
// forward under the policy for s > k and return the realized discounted
// payoff minus the immediate one.
double pathwise_timing_value(int k, const Eigen::VectorXd& x,
                             const ExercisePolicy& policy, Rng& rng);

// Mean of r independent draws; the consumer treats its noise variance
// as tau^2 / r.
double batched_sample(int k, const Eigen::VectorXd& x, int replications,
                      const ExercisePolicy& policy, Rng& rng);

struct BermudanConfig {
  MarketModel model;
  PayoffKind payoff = PayoffKind::basket_put;
  double strike = 40.0;
  SurrogateKind surrogate = SurrogateKind::gp;
  AcquisitionKind acquisition = AcquisitionKind::tmse;
  int replications = 15;
  int n_unique = 80;
  int n0 = 10;
  int restarts = 5;
  int stage_grid_m = 500;
  std::uint64_t seed = 1;
  GaOptions ga;
};

// Stage surrogate via LHS initialization plus sequential design under
// the mu-weighted criterion; stages above k must already be in place.
Surrogate fit_stage(int k, const ExercisePolicy& policy,
                    const BermudanConfig& config, std::uint64_t stage_seed);

// Full backward induction.
ExercisePolicy fit_policy(const BermudanConfig& config);

struct Valuation {
  double value = 0.0;
  double std_error = 0.0;
};

// Out-of-sample Monte Carlo value of the policy; paths are derived from
// eval_seed alone, so a fixed seed gives a fixed test set.
Valuation value_option(const ExercisePolicy& policy, int m_paths,
                       std::uint64_t eval_seed);
// Serial reference twin of the parallel path sweep.
Valuation value_option_serial(const ExercisePolicy& policy, int m_paths,
                              std::uint64_t eval_seed);

}  // namespace lse
