#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lse/surrogate.hpp"

namespace lse {

enum class AcquisitionKind { mcu, tmse, csur, icu, mee, lhs_only };

AcquisitionKind acquisition_kind_from_string(const std::string& s);
std::string to_string(AcquisitionKind k);

// Feasible region: a box, optional halfspaces a.x <= b, and an optional
// extra membership predicate for non-convex truncations.
struct DomainSpec {
  Eigen::MatrixXd box;  // d x 2 (lo, hi)
  Eigen::MatrixXd halfspace_a;
  Eigen::VectorXd halfspace_b;
  std::function<bool(const Eigen::VectorXd&)> extra;

  int dim() const { return static_cast<int>(box.rows()); }
  Eigen::VectorXd widths() const { return box.col(1) - box.col(0); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clamp_box(Eigen::VectorXd x) const;

  static DomainSpec unit_cube(int d);
};

struct AcquisitionSpec {
  AcquisitionKind kind = AcquisitionKind::tmse;
  std::optional<double> gamma;  // fixed MCU weight; unset = adaptive recipe
  // weighting density mu(x); null means uniform
  std::function<double(const Eigen::VectorXd&)> measure;
};

// gamma recipe: IQR of the posterior mean over the grid divided by three
// times the average posterior sd, floored at 0.1.
double adaptive_gamma(const Eigen::VectorXd& means, const Eigen::VectorXd& sds);
double adaptive_gamma(const GridEval& grid);

double mcu(const Surrogate& s, const Eigen::VectorXd& x, double gamma);
double mee(const Surrogate& s, const Eigen::VectorXd& x);
double tmse(const Surrogate& s, const Eigen::VectorXd& x);
double csur(const Surrogate& s, const Eigen::VectorXd& x,
            double noise_var = -1.0);
// Negative weighted sum of look-ahead misclassification over the grid.
double icu(const Surrogate& s, const GridEval& grid,
           const Eigen::VectorXd& weights, const Eigen::VectorXd& x,
           double noise_var = -1.0);

// Assembled score function for the optimizer: resolves the MCU gamma,
// adds the current-error constant to ICU, and applies the mu weighting.
std::function<double(const Eigen::VectorXd&)> make_acquisition_score(
    const AcquisitionSpec& spec, const Surrogate& s, const GridEval* grid,
    const Eigen::VectorXd* grid_weights, double noise_var = -1.0);

struct GaOptions {
  int population = 50;
  int generations = 200;
  double tol = 1e-3;
  int stall = 25;
  int reference = 1024;
};

struct GaResult {
  Eigen::VectorXd x;
  double score = 0.0;
  int generations = 0;
};

GaResult ga_maximize(const std::function<double(const Eigen::VectorXd&)>& score,
                     const DomainSpec& domain, Rng& rng,
                     const GaOptions& opts = {});

Eigen::VectorXd optimize_acquisition(const AcquisitionSpec& spec,
                                     const Surrogate& s,
                                     const DomainSpec& domain,
                                     const GridEval* grid,
                                     const Eigen::VectorXd* grid_weights,
                                     Rng& rng, const GaOptions& opts = {},
                                     double noise_var = -1.0);

}  // namespace lse
