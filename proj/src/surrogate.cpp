#include "lse/surrogate.hpp"

#include <cmath>
#include <stdexcept>
#include <variant>

#include "lse/lookahead.hpp"
#include "lse/parallel.hpp"
#include "lse/stats.hpp"

namespace lse {

SurrogateKind surrogate_kind_from_string(const std::string& s) {
  if (s == "gp") return SurrogateKind::gp;
  if (s == "tgp") return SurrogateKind::tgp;
  if (s == "clgp") return SurrogateKind::clgp;
  if (s == "tp") return SurrogateKind::tp;
  if (s == "mgp") return SurrogateKind::mgp;
  if (s == "mclgp") return SurrogateKind::mclgp;
  throw std::invalid_argument("unknown surrogate kind: " + s);
}

std::string to_string(SurrogateKind k) {
  switch (k) {
    case SurrogateKind::gp: return "gp";
    case SurrogateKind::tgp: return "tgp";
    case SurrogateKind::clgp: return "clgp";
    case SurrogateKind::tp: return "tp";
    case SurrogateKind::mgp: return "mgp";
    case SurrogateKind::mclgp: return "mclgp";
  }
  return "?";
}

struct SurrogateImpl {
  SurrogateKind kind = SurrogateKind::gp;
  FitOptions opts;
  std::variant<GaussianPosterior, TgpPosterior, ClgpPosterior, TPosterior,
               MonotonePosterior>
      model;

  const KernelParams& params() const {
    return std::visit([](const auto& m) -> const KernelParams& {
      return m.params;
    }, model);
  }
  const TrainingSet& data() const {
    return std::visit([](const auto& m) -> const TrainingSet& {
      return m.data;
    }, model);
  }
  const Eigen::MatrixXd& cholB() const {
    switch (kind) {
      case SurrogateKind::gp:
        return std::get<GaussianPosterior>(model).chol;
      case SurrogateKind::tgp:
        return std::get<TgpPosterior>(model).chol_b;
      case SurrogateKind::clgp:
        return std::get<ClgpPosterior>(model).chol_b;
      case SurrogateKind::tp:
        return std::get<TPosterior>(model).chol;
      default:
        return std::get<MonotonePosterior>(model).chol_b;
    }
  }
  const Eigen::VectorXd& weights() const {
    switch (kind) {
      case SurrogateKind::gp:
        return std::get<GaussianPosterior>(model).alpha;
      case SurrogateKind::tgp:
        return std::get<TgpPosterior>(model).mode_weights;
      case SurrogateKind::clgp:
        return std::get<ClgpPosterior>(model).mode_weights;
      case SurrogateKind::tp:
        return std::get<TPosterior>(model).alpha;
      default:
        return std::get<MonotonePosterior>(model).mean_w;
    }
  }
  Eigen::VectorXd kvec(const Eigen::VectorXd& x) const {
    if (kind == SurrogateKind::mgp || kind == SurrogateKind::mclgp)
      return monotone_kvec(std::get<MonotonePosterior>(model), x);
    return kernel_row(data().inputs, x, params());
  }
  double cov_scale() const {
    return kind == SurrogateKind::tp
               ? std::get<TPosterior>(model).cov_factor()
               : 1.0;
  }
  double prior_var() const {
    const double s = params().sigma_se;
    return s * s;
  }
  // additive term in the look-ahead denominator; for the classification
  // models it depends on the candidate's current posterior
  double lookahead_denom(const MeanSd& cand, double noise_var) const {
    const double tau2 =
        noise_var >= 0.0 ? noise_var : params().tau * params().tau;
    switch (kind) {
      case SurrogateKind::tgp: {
        const double nu = *params().nu;
        return tau2 * (nu + 1.0) / (nu - 1.0);
      }
      case SurrogateKind::clgp:
      case SurrogateKind::mclgp:
        return 1.0 / clgp_expected_curvature(cand.mean, cand.sd);
      default:
        return tau2;  // gp, mgp; tp handles scaling separately
    }
  }
  // look-ahead variance from scaled ingredients
  double lookahead_var(double v, double s_star2, const MeanSd& cand,
                       double noise_var) const {
    if (kind == SurrogateKind::tp) {
      const auto& tp = std::get<TPosterior>(model);
      const double gamma = tp.cov_factor();
      const double nu = *tp.params.nu;
      const double n = static_cast<double>(tp.size());
      const double tau2 =
          noise_var >= 0.0 ? noise_var : tp.params.tau * tp.params.tau;
      const double v_g = v / gamma;
      const double s2_g = s_star2 / gamma;
      const double sc2_g = cand.sd * cand.sd / gamma;
      const double gsn = std::max(s2_g - v_g * v_g / (tau2 + sc2_g), 0.0);
      const double beta_check = tp.beta + nu / (nu - 2.0);
      return (nu + beta_check - 2.0) / (nu + n - 1.0) * gsn;
    }
    const double denom = lookahead_denom(cand, noise_var) +
                         cand.sd * cand.sd;
    return std::max(s_star2 - v * v / denom, 0.0);
  }
};

namespace {

MeanSd eval_at(const SurrogateImpl& im, const Eigen::VectorXd& x) {
  Eigen::VectorXd k = im.kvec(x);
  const double mean = k.dot(im.weights());
  im.cholB().triangularView<Eigen::Lower>().solveInPlace(k);
  const double var =
      im.cov_scale() * std::max(im.prior_var() - k.squaredNorm(), 0.0);
  return {mean, std::sqrt(var)};
}

std::vector<int> default_directions(int d) {
  return std::vector<int>(static_cast<std::size_t>(d), +1);
}

double response_scale(const TrainingSet& data) {
  const double r =
      data.responses.maxCoeff() - data.responses.minCoeff();
  return r > 0.0 ? r : 1.0;
}

MonotonePosterior fit_monotone(const TrainingSet& data, const FitOptions& opts,
                               Rng& rng, bool classify,
                               const KernelParams* warm) {
  // Hyperparameters come from the unconstrained counterpart's ML fit;
  // the virtual observations then shape the posterior through EP.
  KernelParams params;
  TrainingSet fit_data = data;
  if (classify) {
    fit_data.responses = sign_responses(data.responses);
    params = fit_clgp(fit_data, opts.bounds, opts.restarts, rng, warm).params;
  } else {
    params = fit_gaussian_gp(data, opts.bounds, opts.restarts, rng, warm)
                 .params;
  }

  MonotoneOptions mono = opts.mono;
  if (mono.directions.empty())
    mono.directions = default_directions(data.dim());
  mono.eta *= classify ? 1.0 : response_scale(data);

  MonotonePosterior post = ep_fit_monotone(fit_data, {}, params, classify,
                                           mono.directions, mono);
  Eigen::MatrixXd box = opts.domain_box;
  if (box.size() == 0) {
    box.resize(data.dim(), 2);
    box.col(0).setZero();
    box.col(1).setOnes();
  }
  const int budget = mono.budget_per_dim * data.dim();
  const std::vector<VirtualDerivObs> added =
      place_virtual_points(post, box, budget, mono);
  if (!added.empty())
    post = ep_fit_monotone(fit_data, added, params, classify, mono.directions,
                           mono);
  return post;
}

}  // namespace

Surrogate Surrogate::fit(const TrainingSet& data, const FitOptions& opts,
                         Rng& rng) {
  auto impl = std::make_shared<SurrogateImpl>();
  impl->kind = opts.kind;
  impl->opts = opts;
  switch (opts.kind) {
    case SurrogateKind::gp:
      impl->model = fit_gaussian_gp(data, opts.bounds, opts.restarts, rng);
      break;
    case SurrogateKind::tgp:
      impl->model = fit_tgp(data, opts.bounds, opts.restarts, rng);
      break;
    case SurrogateKind::clgp: {
      TrainingSet s = data;
      s.responses = sign_responses(data.responses);
      impl->model = fit_clgp(s, opts.bounds, opts.restarts, rng);
      break;
    }
    case SurrogateKind::tp: {
      ParamBounds b = opts.bounds;
      b.nu_hi = std::min(b.nu_hi, 10.0);  // small dof keeps TP non-degenerate
      FitOptions o = opts;
      o.bounds = b;
      impl->opts = o;
      impl->model = fit_tp(data, b, opts.restarts, rng);
      break;
    }
    case SurrogateKind::mgp:
      impl->model = fit_monotone(data, opts, rng, false, nullptr);
      break;
    case SurrogateKind::mclgp:
      impl->model = fit_monotone(data, opts, rng, true, nullptr);
      break;
  }
  return Surrogate(std::move(impl));
}

Surrogate Surrogate::refit(const TrainingSet& data, Rng& rng) const {
  auto impl = std::make_shared<SurrogateImpl>();
  impl->kind = impl_->kind;
  impl->opts = impl_->opts;
  const KernelParams warm = impl_->params();
  const FitOptions& opts = impl->opts;
  switch (impl->kind) {
    case SurrogateKind::gp:
      impl->model =
          fit_gaussian_gp(data, opts.bounds, opts.restarts, rng, &warm);
      break;
    case SurrogateKind::tgp:
      impl->model = fit_tgp(data, opts.bounds, opts.restarts, rng, &warm);
      break;
    case SurrogateKind::clgp: {
      TrainingSet s = data;
      s.responses = sign_responses(data.responses);
      impl->model = fit_clgp(s, opts.bounds, opts.restarts, rng, &warm);
      break;
    }
    case SurrogateKind::tp:
      impl->model = fit_tp(data, opts.bounds, opts.restarts, rng, &warm);
      break;
    case SurrogateKind::mgp:
      impl->model = fit_monotone(data, opts, rng, false, &warm);
      break;
    case SurrogateKind::mclgp:
      impl->model = fit_monotone(data, opts, rng, true, &warm);
      break;
  }
  return Surrogate(std::move(impl));
}

Surrogate Surrogate::with_observation(const Eigen::VectorXd& x, double y,
                                      double replication) const {
  auto impl = std::make_shared<SurrogateImpl>();
  impl->kind = impl_->kind;
  impl->opts = impl_->opts;
  switch (impl->kind) {
    case SurrogateKind::gp:
      impl->model = update_gaussian(std::get<GaussianPosterior>(impl_->model),
                                    x, y, replication);
      break;
    case SurrogateKind::tgp: {
      const auto& m = std::get<TgpPosterior>(impl_->model);
      impl->model =
          make_tgp_posterior(m.params, m.data.appended(x, y, replication));
      break;
    }
    case SurrogateKind::clgp: {
      const auto& m = std::get<ClgpPosterior>(impl_->model);
      impl->model = make_clgp_posterior(
          m.params, m.data.appended(x, y < 0.0 ? -1.0 : 1.0, replication));
      break;
    }
    case SurrogateKind::tp: {
      const auto& m = std::get<TPosterior>(impl_->model);
      impl->model =
          make_tp_posterior(m.params, m.data.appended(x, y, replication));
      break;
    }
    default:
      impl->model = monotone_with_observation(
          std::get<MonotonePosterior>(impl_->model), x, y, replication);
      break;
  }
  return Surrogate(std::move(impl));
}

SurrogateKind Surrogate::kind() const { return impl_->kind; }

bool Surrogate::is_classifier() const {
  return impl_->kind == SurrogateKind::clgp ||
         impl_->kind == SurrogateKind::mclgp;
}

const KernelParams& Surrogate::params() const { return impl_->params(); }
const TrainingSet& Surrogate::data() const { return impl_->data(); }
Eigen::Index Surrogate::n() const { return impl_->data().size(); }

MeanSd Surrogate::at(const Eigen::VectorXd& x) const {
  return eval_at(*impl_, x);
}

double Surrogate::cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  Eigen::VectorXd ka = impl_->kvec(a), kb = impl_->kvec(b);
  impl_->cholB().triangularView<Eigen::Lower>().solveInPlace(ka);
  impl_->cholB().triangularView<Eigen::Lower>().solveInPlace(kb);
  return impl_->cov_scale() * (se_kernel(a, b, impl_->params()) - ka.dot(kb));
}

double Surrogate::lookahead_sd(const Eigen::VectorXd& x_star,
                               const Eigen::VectorXd& cand,
                               double noise_var) const {
  const MeanSd c = eval_at(*impl_, cand);
  const MeanSd s = eval_at(*impl_, x_star);
  const double v = cov(x_star, cand);
  return std::sqrt(impl_->lookahead_var(v, s.sd * s.sd, c, noise_var));
}

double Surrogate::tail_cdf(double u) const {
  if (impl_->kind == SurrogateKind::tp)
    return stats::t_cdf(u, std::get<TPosterior>(impl_->model).predictive_dof());
  return stats::norm_cdf(u);
}

double Surrogate::band_quantile(double p) const {
  if (impl_->kind == SurrogateKind::tp)
    return stats::t_quantile(
        p, std::get<TPosterior>(impl_->model).predictive_dof());
  return stats::norm_quantile(p);
}

double Surrogate::noise_variance() const {
  const double t = impl_->params().tau;
  return t * t;
}

GridEval Surrogate::prepare_grid(const Eigen::MatrixXd& points) const {
  GridEval g;
  g.impl_ = impl_;
  g.points_ = points;
  const Eigen::Index m = points.rows();
  const Eigen::Index ne = impl_->weights().size();
  g.solved_.resize(ne, m);
  g.mean_.resize(m);
  g.sd_.resize(m);
  const double scale = impl_->cov_scale();
  const SurrogateImpl* im = impl_.get();
  par::parallel_for(static_cast<std::size_t>(m), [&g, im, scale,
                                                  &points](std::size_t idx) {
    const Eigen::Index i = static_cast<Eigen::Index>(idx);
    Eigen::VectorXd k = im->kvec(points.row(i).transpose());
    g.mean_[i] = k.dot(im->weights());
    im->cholB().triangularView<Eigen::Lower>().solveInPlace(k);
    g.solved_.col(i) = k;
    g.sd_[i] =
        std::sqrt(scale * std::max(im->prior_var() - k.squaredNorm(), 0.0));
  });
  return g;
}

Eigen::VectorXd GridEval::lookahead_sd(const Eigen::VectorXd& cand,
                                       double noise_var) const {
  const Eigen::Index m = points_.rows();
  Eigen::VectorXd kc = impl_->kvec(cand);
  const double mc = kc.dot(impl_->weights());
  impl_->cholB().triangularView<Eigen::Lower>().solveInPlace(kc);
  const double scale = impl_->cov_scale();
  const double sc2 =
      scale * std::max(impl_->prior_var() - kc.squaredNorm(), 0.0);
  const MeanSd cand_ms{mc, std::sqrt(sc2)};
  Eigen::VectorXd out(m);
  const KernelParams& p = impl_->params();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v =
        scale * (se_kernel(points_.row(i).transpose(), cand, p) -
                 solved_.col(i).dot(kc));
    out[i] = std::sqrt(
        impl_->lookahead_var(v, sd_[i] * sd_[i], cand_ms, noise_var));
  }
  return out;
}

}  // namespace lse
