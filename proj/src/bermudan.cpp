#include "lse/bermudan.hpp"

#include <cmath>
#include <cstdio>

#include "lse/experiment.hpp"
#include "lse/metrics.hpp"
#include "lse/parallel.hpp"
#include "lse/sobol.hpp"

namespace lse {

PayoffKind payoff_kind_from_string(const std::string& s) {
  if (s == "basket_put") return PayoffKind::basket_put;
  if (s == "max_call") return PayoffKind::max_call;
  throw std::invalid_argument("unknown payoff kind: " + s);
}

std::string to_string(PayoffKind k) {
  return k == PayoffKind::basket_put ? "basket_put" : "max_call";
}

double Payoff::operator()(double t, const Eigen::VectorXd& x) const {
  double intrinsic;
  if (kind == PayoffKind::basket_put)
    intrinsic = strike - x.mean();
  else
    intrinsic = x.maxCoeff() - strike;
  return intrinsic > 0.0 ? std::exp(-rate * t) * intrinsic : 0.0;
}

Eigen::VectorXd gbm_step(const Eigen::VectorXd& x, const MarketModel& model,
                         Rng& rng) {
  const double drift =
      (model.rate - model.dividend - 0.5 * model.sigma * model.sigma) *
      model.dt;
  const double vol = model.sigma * std::sqrt(model.dt);
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out[i] = x[i] * std::exp(drift + vol * rng.normal());
  return out;
}

DomainSpec bermudan_domain(PayoffKind kind, double strike, int d) {
  DomainSpec dom;
  dom.box.resize(d, 2);
  if (kind == PayoffKind::basket_put) {
    dom.box.col(0).setConstant(0.625 * strike);
    dom.box.col(1).setConstant(1.375 * strike);
    // payoff positive iff the basket average stays below the strike
    dom.halfspace_a = Eigen::MatrixXd::Ones(1, d);
    dom.halfspace_b = Eigen::VectorXd::Constant(1, d * strike);
  } else {
    dom.box.col(0).setConstant(0.5 * strike);
    dom.box.col(1).setConstant(1.5 * strike);
    dom.extra = [strike](const Eigen::VectorXd& x) {
      return x.maxCoeff() > strike;
    };
  }
  return dom;
}

double lognormal_density(const Eigen::VectorXd& x, const MarketModel& model,
                         double t) {
  const double drift =
      (model.rate - model.dividend - 0.5 * model.sigma * model.sigma) * t;
  const double sd = model.sigma * std::sqrt(t);
  double logp = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0) return 0.0;
    const double z = (std::log(x[i] / model.x0[i]) - drift) / sd;
    logp += -0.5 * z * z - std::log(x[i] * sd);
  }
  return std::exp(logp - 0.5 * x.size() * std::log(2.0 * M_PI));
}

bool ExercisePolicy::exercise(int k, const Eigen::VectorXd& x) const {
  if (k >= model.steps()) return payoff(model.time_at(k), x) > 0.0;
  if (payoff(model.time_at(k), x) <= 0.0) return false;  // stopping ruled out
  const std::size_t idx = static_cast<std::size_t>(k - 1);
  if (idx >= stages.size() || !stage_ok[idx]) return false;
  // classify at the box clamp so that far-out paths inherit the nearest
  // fitted behaviour instead of the prior mean
  return stages[idx].at(domain.clamp_box(x)).mean < 0.0;
}

double pathwise_timing_value(int k, const Eigen::VectorXd& x,
                             const ExercisePolicy& policy, Rng& rng) {
  const double immediate = policy.payoff(policy.model.time_at(k), x);
  Eigen::VectorXd X = x;
  const int steps = policy.model.steps();
  for (int s = k + 1; s <= steps; ++s) {
    X = gbm_step(X, policy.model, rng);
    if (s == steps)
      return policy.payoff(policy.model.time_at(s), X) - immediate;
    if (policy.exercise(s, X))
      return policy.payoff(policy.model.time_at(s), X) - immediate;
  }
  return -immediate;  // unreachable for steps > k
}

double batched_sample(int k, const Eigen::VectorXd& x, int replications,
                      const ExercisePolicy& policy, Rng& rng) {
  double acc = 0.0;
  for (int i = 0; i < replications; ++i)
    acc += pathwise_timing_value(k, x, policy, rng);
  return acc / replications;
}

namespace {

Eigen::MatrixXd lhs_in_domain(int n, const DomainSpec& dom, Rng& rng) {
  Eigen::MatrixXd unit = lhs_unit(n, dom.dim(), rng);
  Eigen::MatrixXd out(n, dom.dim());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dom.dim(); ++j)
      out(i, j) =
          dom.box(j, 0) + (dom.box(j, 1) - dom.box(j, 0)) * unit(i, j);
  for (int i = 0; i < n; ++i) {
    int guard = 0;
    while (!dom.contains(out.row(i).transpose()) && guard++ < 4096) {
      for (int j = 0; j < dom.dim(); ++j)
        out(i, j) = rng.uniform(dom.box(j, 0), dom.box(j, 1));
    }
    if (guard >= 4096)
      throw FitError("lhs_in_domain: could not find a feasible point");
  }
  return out;
}

}  // namespace

Surrogate fit_stage(int k, const ExercisePolicy& policy,
                    const BermudanConfig& config, std::uint64_t stage_seed) {
  const DomainSpec& dom = policy.domain;
  const double t_k = policy.model.time_at(k);
  const int r = config.replications;

  Rng rng_sim(Rng::derive(stage_seed, 1));
  Rng rng_ga(Rng::derive(stage_seed, 2));
  Rng rng_fit(Rng::derive(stage_seed, 3));

  auto measure = [&model = policy.model, t_k](const Eigen::VectorXd& x) {
    return lognormal_density(x, model, t_k);
  };
  const TestSet grid_set = build_test_set_weighted(
      dom, config.stage_grid_m, measure, Rng::derive(stage_seed, 4));

  const bool lhs_only = config.acquisition == AcquisitionKind::lhs_only;
  const int n_init = lhs_only ? config.n_unique : config.n0;

  TrainingSet data;
  data.inputs = lhs_in_domain(n_init, dom, rng_sim);
  data.responses.resize(n_init);
  data.replication = Eigen::VectorXd::Constant(n_init, r);
  for (int i = 0; i < n_init; ++i)
    data.responses[i] =
        batched_sample(k, data.inputs.row(i).transpose(), r, policy, rng_sim);

  FitOptions fopts;
  fopts.kind = config.surrogate;
  fopts.bounds = ParamBounds::for_data(data, dom.widths());
  // tau is the raw single-draw noise scale; batch means shrink it by r
  fopts.bounds.tau_hi *= std::sqrt(static_cast<double>(r));
  fopts.restarts = config.restarts;
  fopts.domain_box = dom.box;
  Surrogate s = Surrogate::fit(data, fopts, rng_fit);

  const RefitSchedule schedule{n_init};
  for (int m = n_init; m < config.n_unique; ++m) {
    GridEval grid = s.prepare_grid(grid_set.points);
    AcquisitionSpec aspec;
    aspec.kind = config.acquisition;
    aspec.measure = measure;
    const double noise_var = s.noise_variance() / r;
    const Eigen::VectorXd x_next =
        optimize_acquisition(aspec, s, dom, &grid, &grid_set.weights, rng_ga,
                             config.ga, noise_var);
    const double y = batched_sample(k, x_next, r, policy, rng_sim);
    data = data.appended(x_next, y, r);
    if (schedule.should_refit(m + 1)) {
      try {
        s = s.refit(data, rng_fit);
      } catch (const FitError&) {
        s = s.with_observation(x_next, y, r);
      }
    } else {
      s = s.with_observation(x_next, y, r);
    }
  }
  return s;
}

ExercisePolicy fit_policy(const BermudanConfig& config) {
  ExercisePolicy policy;
  policy.model = config.model;
  policy.payoff.kind = config.payoff;
  policy.payoff.strike = config.strike;
  policy.payoff.rate = config.model.rate;
  policy.domain = bermudan_domain(config.payoff, config.strike,
                                  config.model.d);
  const int stages = config.model.steps() - 1;
  policy.stages.resize(stages);
  policy.stage_ok.assign(stages, false);

  for (int k = stages; k >= 1; --k) {
    const std::uint64_t stage_seed =
        Rng::derive(config.seed, 1000 + static_cast<std::uint64_t>(k));
    try {
      policy.stages[k - 1] = fit_stage(k, policy, config, stage_seed);
      policy.stage_ok[k - 1] = true;
    } catch (const FitError& e) {
      std::fprintf(stderr,
                   "warning: stage %d fit failed (%s); continuing everywhere\n",
                   k, e.what());
    }
  }
  return policy;
}

namespace {

double path_payoff(const ExercisePolicy& policy, Rng& rng) {
  Eigen::VectorXd X = policy.model.x0;
  const int steps = policy.model.steps();
  for (int s = 1; s <= steps; ++s) {
    X = gbm_step(X, policy.model, rng);
    if (s == steps || policy.exercise(s, X))
      return policy.payoff(policy.model.time_at(s), X);
  }
  return 0.0;
}

template <class ForEach>
Valuation value_with(const ExercisePolicy& policy, int m_paths,
                     std::uint64_t eval_seed, ForEach&& for_each) {
  Eigen::VectorXd payoffs(m_paths);
  for_each(static_cast<std::size_t>(m_paths), [&](std::size_t i) {
    Rng rng(Rng::derive(eval_seed, i));
    payoffs[static_cast<Eigen::Index>(i)] = path_payoff(policy, rng);
  });
  Valuation v;
  v.value = payoffs.mean();
  const double var =
      (payoffs.array() - v.value).square().sum() / (m_paths - 1);
  v.std_error = std::sqrt(var / m_paths);
  return v;
}

}  // namespace

Valuation value_option(const ExercisePolicy& policy, int m_paths,
                       std::uint64_t eval_seed) {
  return value_with(policy, m_paths, eval_seed, [](std::size_t n, auto&& fn) {
    par::parallel_for(n, fn);
  });
}

Valuation value_option_serial(const ExercisePolicy& policy, int m_paths,
                              std::uint64_t eval_seed) {
  return value_with(policy, m_paths, eval_seed, [](std::size_t n, auto&& fn) {
    par::serial_for(n, fn);
  });
}

}  // namespace lse
