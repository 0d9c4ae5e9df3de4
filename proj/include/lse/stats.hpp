#pragma once

#include <Eigen/Core>

namespace lse::stats {

// Standard normal density, cdf, and quantile. The quantile uses a
// rational approximation polished by one Halley step, accurate to
// ~1e-15 over (0,1).
double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);

// Regularized incomplete beta I_x(a,b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Student-t with `nu` degrees of freedom (standardized, scale 1).
double t_log_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_survival(double x, double nu);  // P(T > x)
double t_quantile(double p, double nu);

// log density of a t_nu variable with scale parameter `scale`.
double t_log_pdf_scaled(double x, double nu, double scale);

// Interpolated sample quantile (type 7) and interquartile range.
double sample_quantile(Eigen::VectorXd values, double p);
double interquartile_range(const Eigen::VectorXd& values);

}  // namespace lse::stats
