#include "lse/acquisition.hpp"

#include <cmath>
#include <stdexcept>

#include "lse/stats.hpp"

namespace lse {

AcquisitionKind acquisition_kind_from_string(const std::string& s) {
  if (s == "mcu") return AcquisitionKind::mcu;
  if (s == "tmse") return AcquisitionKind::tmse;
  if (s == "csur") return AcquisitionKind::csur;
  if (s == "icu") return AcquisitionKind::icu;
  if (s == "mee") return AcquisitionKind::mee;
  if (s == "lhs") return AcquisitionKind::lhs_only;
  throw std::invalid_argument("unknown acquisition kind: " + s);
}

std::string to_string(AcquisitionKind k) {
  switch (k) {
    case AcquisitionKind::mcu: return "mcu";
    case AcquisitionKind::tmse: return "tmse";
    case AcquisitionKind::csur: return "csur";
    case AcquisitionKind::icu: return "icu";
    case AcquisitionKind::mee: return "mee";
    case AcquisitionKind::lhs_only: return "lhs";
  }
  return "?";
}

bool DomainSpec::contains(const Eigen::VectorXd& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < box(i, 0) || x[i] > box(i, 1)) return false;
  for (Eigen::Index r = 0; r < halfspace_a.rows(); ++r)
    if (halfspace_a.row(r).dot(x) > halfspace_b[r] + 1e-12) return false;
  if (extra && !extra(x)) return false;
  return true;
}

Eigen::VectorXd DomainSpec::clamp_box(Eigen::VectorXd x) const {
  for (int i = 0; i < dim(); ++i)
    x[i] = std::min(std::max(x[i], box(i, 0)), box(i, 1));
  return x;
}

DomainSpec DomainSpec::unit_cube(int d) {
  DomainSpec dom;
  dom.box.resize(d, 2);
  dom.box.col(0).setZero();
  dom.box.col(1).setOnes();
  return dom;
}

double adaptive_gamma(const Eigen::VectorXd& means,
                      const Eigen::VectorXd& sds) {
  const double avg_sd = sds.mean();
  if (!(avg_sd > 0.0))
    throw std::invalid_argument("adaptive_gamma: zero average sd");
  const double iqr = stats::interquartile_range(means);
  return std::max(iqr / (3.0 * avg_sd), 0.1);
}

double adaptive_gamma(const GridEval& grid) {
  return adaptive_gamma(grid.mean(), grid.sd());
}

double mcu(const Surrogate& s, const Eigen::VectorXd& x, double gamma) {
  const MeanSd ms = s.at(x);
  return -std::fabs(ms.mean) + gamma * ms.sd;
}

double mee(const Surrogate& s, const Eigen::VectorXd& x) {
  const MeanSd ms = s.at(x);
  if (ms.sd <= 0.0) return ms.mean == 0.0 ? 0.5 : 0.0;
  return s.tail_cdf(-std::fabs(ms.mean) / ms.sd);
}

double tmse(const Surrogate& s, const Eigen::VectorXd& x) {
  const MeanSd ms = s.at(x);
  if (ms.sd <= 0.0) return 0.0;
  // s^2 * N(fhat; 0, s^2) = s/sqrt(2 pi) * exp(-fhat^2 / (2 s^2))
  return ms.sd / std::sqrt(2.0 * M_PI) *
         std::exp(-0.5 * ms.mean * ms.mean / (ms.sd * ms.sd));
}

double csur(const Surrogate& s, const Eigen::VectorXd& x, double noise_var) {
  const MeanSd ms = s.at(x);
  if (ms.sd <= 0.0) return 0.0;
  const double ahead = s.lookahead_sd(x, x, noise_var);
  const double now = s.tail_cdf(-std::fabs(ms.mean) / ms.sd);
  if (ahead <= 0.0) return now;
  return now - s.tail_cdf(-std::fabs(ms.mean) / ahead);
}

double icu(const Surrogate& s, const GridEval& grid,
           const Eigen::VectorXd& weights, const Eigen::VectorXd& x,
           double noise_var) {
  const Eigen::VectorXd ahead = grid.lookahead_sd(x, noise_var);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ahead.size(); ++i) {
    const double sd = ahead[i];
    const double m = std::fabs(grid.mean()[i]);
    const double e = sd > 0.0 ? s.tail_cdf(-m / sd) : (m == 0.0 ? 0.5 : 0.0);
    acc += e * weights[i];
  }
  return -acc;
}

std::function<double(const Eigen::VectorXd&)> make_acquisition_score(
    const AcquisitionSpec& spec, const Surrogate& s, const GridEval* grid,
    const Eigen::VectorXd* grid_weights, double noise_var) {
  std::function<double(const Eigen::VectorXd&)> base;
  switch (spec.kind) {
    case AcquisitionKind::mcu: {
      double gamma;
      if (spec.gamma) {
        gamma = *spec.gamma;
      } else {
        if (!grid)
          throw std::invalid_argument("mcu: adaptive gamma needs a grid");
        gamma = adaptive_gamma(*grid);
      }
      base = [&s, gamma](const Eigen::VectorXd& x) { return mcu(s, x, gamma); };
      break;
    }
    case AcquisitionKind::tmse:
      base = [&s](const Eigen::VectorXd& x) { return tmse(s, x); };
      break;
    case AcquisitionKind::mee:
      base = [&s](const Eigen::VectorXd& x) { return mee(s, x); };
      break;
    case AcquisitionKind::csur:
      base = [&s, noise_var](const Eigen::VectorXd& x) {
        return csur(s, x, noise_var);
      };
      break;
    case AcquisitionKind::icu: {
      if (!grid || !grid_weights)
        throw std::invalid_argument("icu: needs a weighted grid");
      // keep the criterion nonnegative by adding back the current
      // integrated error, so the mu weighting cannot invert preferences
      double current = 0.0;
      for (Eigen::Index i = 0; i < grid->mean().size(); ++i) {
        const double sd = grid->sd()[i];
        const double m = std::fabs(grid->mean()[i]);
        const double e =
            sd > 0.0 ? s.tail_cdf(-m / sd) : (m == 0.0 ? 0.5 : 0.0);
        current += e * (*grid_weights)[i];
      }
      base = [&s, grid, grid_weights, noise_var,
              current](const Eigen::VectorXd& x) {
        return current + icu(s, *grid, *grid_weights, x, noise_var);
      };
      break;
    }
    case AcquisitionKind::lhs_only:
      throw std::invalid_argument("lhs baseline has no acquisition score");
  }
  if (!spec.measure) return base;
  auto measure = spec.measure;
  return [base, measure](const Eigen::VectorXd& x) {
    return base(x) * measure(x);
  };
}

Eigen::VectorXd optimize_acquisition(const AcquisitionSpec& spec,
                                     const Surrogate& s,
                                     const DomainSpec& domain,
                                     const GridEval* grid,
                                     const Eigen::VectorXd* grid_weights,
                                     Rng& rng, const GaOptions& opts,
                                     double noise_var) {
  const auto score =
      make_acquisition_score(spec, s, grid, grid_weights, noise_var);
  return ga_maximize(score, domain, rng, opts).x;
}

}  // namespace lse
