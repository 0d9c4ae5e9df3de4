// Compares the OpenMP kernels against their serial reference twins on
// representative workloads and checks that both produce identical bits.
#include <chrono>
#include <cstdio>

#include "lse/bermudan.hpp"
#include "lse/metrics.hpp"
#include "lse/parallel.hpp"
#include "lse/sobol.hpp"
#include "lse/surrogate.hpp"

using namespace lse;

namespace {

double time_s(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
             .count() /
         reps;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-24s serial %8.4f s   openmp %8.4f s   speedup %5.2fx   %s\n",
              name, serial, parallel, serial / parallel,
              same ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  Rng rng(42);

  // test-set sweep over a fitted surrogate
  TrainingSet data;
  const int n = 120;
  data.inputs.resize(n, 2);
  data.responses.resize(n);
  for (int i = 0; i < n; ++i) {
    data.inputs(i, 0) = rng.uniform();
    data.inputs(i, 1) = rng.uniform();
    data.responses[i] = std::sin(3.0 * data.inputs(i, 0)) *
                            std::cos(2.0 * data.inputs(i, 1)) +
                        0.2 * rng.normal();
  }
  FitOptions opts;
  opts.bounds = ParamBounds::for_data(data, Eigen::VectorXd::Ones(2));
  opts.restarts = 2;
  Surrogate s = Surrogate::fit(data, opts, rng);

  Sobol sob(2, 7);
  TestSet ts;
  ts.points = sob.sample(4000);
  ts.weights = Eigen::VectorXd::Constant(4000, 1.0 / 4000);

  Eigen::VectorXd mean_par, mean_ser;
  const double t_grid_ser = time_s(
      [&] {
        par::set_max_threads(1);
        mean_ser = s.prepare_grid(ts.points).mean();
      },
      3);
  const double t_grid_par = time_s(
      [&] {
        par::set_max_threads(0);
        mean_par = s.prepare_grid(ts.points).mean();
      },
      3);
  report("test-set sweep", t_grid_ser, t_grid_par, mean_ser == mean_par);

  // out-of-sample valuation of a Bermudan policy (LHS-only, cheap fit)
  BermudanConfig cfg;
  cfg.model.d = 2;
  cfg.model.x0 = Eigen::VectorXd::Constant(2, 40.0);
  cfg.acquisition = AcquisitionKind::lhs_only;
  cfg.replications = 3;
  cfg.n_unique = 30;
  cfg.n0 = 10;
  cfg.restarts = 2;
  cfg.seed = 11;
  const ExercisePolicy policy = fit_policy(cfg);

  Valuation v_ser, v_par;
  const double t_val_ser =
      time_s([&] { v_ser = value_option_serial(policy, 40000, 99); }, 2);
  par::set_max_threads(0);
  const double t_val_par =
      time_s([&] { v_par = value_option(policy, 40000, 99); }, 2);
  report("policy valuation", t_val_ser, t_val_par,
         v_ser.value == v_par.value && v_ser.std_error == v_par.std_error);
  std::printf("value %.4f (se %.4f)\n", v_par.value, v_par.std_error);
  return 0;
}
