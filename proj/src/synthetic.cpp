#include "lse/synthetic.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>

#include "lse/sobol.hpp"

namespace lse {

namespace {

double quadratic1d(const Eigen::VectorXd& x) {
  return (x[0] + 0.75) * (x[0] - 0.75);
}

double braninhoo2d(const Eigen::VectorXd& x) {
  const double x1 = 15.0 * x[0];
  const double x2 = 15.0 * x[1] - 5.0;
  const double a =
      x1 - 5.1 * x2 * x2 / (4.0 * M_PI * M_PI) + 5.0 * x2 / M_PI - 20.0;
  const double b = (10.0 - 10.0 / (8.0 * M_PI)) * std::cos(x1);
  return (a * a + b - 181.47) / 178.0;
}

// 6 x 4 coefficient tables
const double kHartmanC[4] = {0.2, 0.22, 0.28, 0.3};
const double kHartmanA[6][4] = {
    {8.00, 0.50, 3.00, 10.00}, {3.00, 8.00, 3.50, 6.00},
    {10.00, 10.00, 1.70, 0.50}, {3.50, 1.00, 8.00, 8.00},
    {1.70, 6.00, 10.00, 1.00}, {6.00, 9.00, 6.00, 9.00}};
const double kHartmanP[6][4] = {
    {0.1312, 0.2329, 0.2348, 0.4047}, {0.1696, 0.4135, 0.1451, 0.8828},
    {0.5569, 0.8307, 0.3522, 0.8732}, {0.0124, 0.3736, 0.2883, 0.5743},
    {0.8283, 0.1004, 0.3047, 0.1091}, {0.5886, 0.9991, 0.6650, 0.0381}};

double hartman6(const Eigen::VectorXd& x) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double e = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double d = x[j] - kHartmanP[j][i];
      e += kHartmanA[j][i] * d * d;
    }
    s += kHartmanC[i] * std::exp(-e);
  }
  return -(s - 0.1) / 0.1;
}

void check_domain(const Eigen::VectorXd& x, int d) {
  if (x.size() != d) throw std::invalid_argument("synthetic: wrong dimension");
  for (int i = 0; i < d; ++i)
    if (x[i] < 0.0 || x[i] > 1.0)
      throw std::invalid_argument("synthetic: input outside [0,1]^d");
}

}  // namespace

SyntheticFunction make_synthetic(const std::string& name) {
  SyntheticFunction fn;
  fn.name = name;
  if (name == "quadratic1d") {
    fn.dim = 1;
    fn.eval = [](const Eigen::VectorXd& x) {
      check_domain(x, 1);
      return quadratic1d(x);
    };
  } else if (name == "braninhoo2d") {
    fn.dim = 2;
    fn.eval = [](const Eigen::VectorXd& x) {
      check_domain(x, 2);
      return braninhoo2d(x);
    };
  } else if (name == "hartman6") {
    fn.dim = 6;
    fn.eval = [](const Eigen::VectorXd& x) {
      check_domain(x, 6);
      return hartman6(x);
    };
  } else {
    throw std::invalid_argument("unknown synthetic function: " + name);
  }
  return fn;
}

double synthetic_range(const SyntheticFunction& fn) {
  static std::mutex mu;
  static std::map<std::string, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(fn.name);
    if (it != cache.end()) return it->second;
  }
  Sobol sob(fn.dim, 0x5eedull);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < 100000; ++i) {
    const double v = fn.eval(sob.next());
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::lock_guard<std::mutex> lock(mu);
  cache[fn.name] = hi - lo;
  return hi - lo;
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "t_small") return NoiseKind::t_small;
  if (s == "t_large") return NoiseKind::t_large;
  if (s == "gsn_mix") return NoiseKind::gsn_mix;
  if (s == "t_hetero") return NoiseKind::t_hetero;
  throw std::invalid_argument("unknown noise kind: " + s);
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::t_small: return "t_small";
    case NoiseKind::t_large: return "t_large";
    case NoiseKind::gsn_mix: return "gsn_mix";
    case NoiseKind::t_hetero: return "t_hetero";
  }
  return "?";
}

double NoiseSpec::sd(const Eigen::VectorXd& x) const {
  switch (kind) {
    case NoiseKind::t_small: return 0.1 * r_f;
    case NoiseKind::t_large: return 0.5 * r_f;
    case NoiseKind::gsn_mix:
      return std::sqrt(0.5 * 0.25 * r_f * r_f + 0.5 * r_f * r_f);
    case NoiseKind::t_hetero: return 0.4 * (4.0 * x[0] + 1.0);
  }
  return 0.0;
}

double NoiseSpec::dof(const Eigen::VectorXd& x) const {
  switch (kind) {
    case NoiseKind::t_small:
    case NoiseKind::t_large: return 3.0;
    case NoiseKind::t_hetero: return std::max(6.0 - 4.0 * x[0], 2.1);
    case NoiseKind::gsn_mix: return std::numeric_limits<double>::quiet_NaN();
  }
  return 0.0;
}

double NoiseSpec::sample(const Eigen::VectorXd& x, Rng& rng) const {
  if (kind == NoiseKind::gsn_mix) {
    const double sd1 = 0.5 * r_f, sd2 = r_f;
    const bool first = rng.uniform() < 0.5;
    return (first ? sd1 : sd2) * rng.normal();
  }
  const double nu = dof(x);
  const double scale = sd(x) * std::sqrt((nu - 2.0) / nu);
  return scale * rng.student_t(nu);
}

NoiseSpec make_noise(NoiseKind kind, double r_f) {
  NoiseSpec spec;
  spec.kind = kind;
  spec.r_f = r_f;
  return spec;
}

}  // namespace lse
