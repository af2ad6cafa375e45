#pragma once

// Generalized Pareto distribution kernels.
//
// Two parameterizations are used throughout the library:
//   GpdScale  (tau, xi, alpha)  F(y) = 1 - (1 + xi (y - alpha) / tau)^(-1/xi)
//   GpdMean   (mu, xi)          zero-located, tau = mu (1 - xi), needs xi < 1
// The exponential law is the xi -> 0 limit and is used whenever |xi| < kXiLimit.

namespace zitpo {

/// |xi| below this routes every kernel to the exponential branch.
inline constexpr double kXiLimit = 1e-8;

struct GpdScale {
  double tau = 1.0;
  double xi = 0.0;
  double alpha = 0.0;
};

struct GpdMean {
  double mu = 1.0;
  double xi = 0.0;
};

void validate(const GpdScale& p);
void validate(const GpdMean& p);

GpdScale to_scale(const GpdMean& p);
/// Requires alpha == 0 and xi < 1.
GpdMean to_mean(const GpdScale& p);

/// Right end of the support: alpha - tau / xi for xi < 0, +inf otherwise.
double upper_endpoint(const GpdScale& p);

double gpd_cdf(double y, const GpdScale& p);
double gpd_log_survival(double y, const GpdScale& p);
double gpd_pdf(double y, const GpdScale& p);
double gpd_log_pdf(double y, const GpdScale& p);

/// Inverse CDF for q in [0, 1).
double gpd_quantile(double q, const GpdScale& p);

/// F(mu | GpdMean(mu, xi)) = 1 - (1 - xi)^(1/xi); does not depend on mu.
double mean_quantile_level(double xi);

/// Law of (Y | Y > y_bullet) for a zero-located GPD: location y_bullet,
/// scale tau + xi * y_bullet, same shape.
GpdScale excess_distribution(const GpdScale& p, double y_bullet);

/// E[Y | Y > y_bullet] = mu + xi y_bullet / (1 - xi) + y_bullet.
double mean_over_threshold(const GpdMean& p, double y_bullet);

namespace detail {

// Standardized kernels on z = (y - alpha) / tau >= 0, no argument checks.
// Beyond the upper endpoint (xi < 0) the log-survival is -inf.
double log_survival_std(double z, double xi);
double log_pdf_std(double z, double xi);

}  // namespace detail

}  // namespace zitpo
