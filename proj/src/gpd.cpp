#include "zitpo/gpd.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "zitpo/error.hpp"

namespace zitpo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_exponential(double xi) { return std::abs(xi) < kXiLimit; }

// Checks y against the closed support [alpha, upper] and returns z.
double standardize(double y, const GpdScale& p) {
  validate(p);
  if (std::isnan(y) || y < p.alpha) {
    throw DomainError("gpd: y=" + std::to_string(y) + " is below the location " +
                      std::to_string(p.alpha));
  }
  if (y > upper_endpoint(p)) {
    throw DomainError("gpd: y=" + std::to_string(y) + " is above the upper endpoint " +
                      std::to_string(upper_endpoint(p)));
  }
  return (y - p.alpha) / p.tau;
}

}  // namespace

void validate(const GpdScale& p) {
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) {
    throw DomainError("gpd: scale tau must be positive and finite");
  }
  if (!std::isfinite(p.xi)) throw DomainError("gpd: shape xi must be finite");
  if (!(p.alpha >= 0.0) || !std::isfinite(p.alpha)) {
    throw DomainError("gpd: location alpha must be nonnegative");
  }
}

void validate(const GpdMean& p) {
  if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw DomainError("gpd: mean mu must be positive");
  if (!(p.xi < 1.0)) throw DomainError("gpd: mean requires xi < 1");
}

GpdScale to_scale(const GpdMean& p) {
  validate(p);
  return {p.mu * (1.0 - p.xi), p.xi, 0.0};
}

GpdMean to_mean(const GpdScale& p) {
  validate(p);
  if (p.alpha != 0.0) throw DomainError("gpd: mean form requires alpha == 0");
  if (!(p.xi < 1.0)) throw DomainError("gpd: mean requires xi < 1");
  return {p.tau / (1.0 - p.xi), p.xi};
}

double upper_endpoint(const GpdScale& p) {
  if (p.xi < 0.0 && !is_exponential(p.xi)) return p.alpha - p.tau / p.xi;
  return kInf;
}

namespace detail {

double log_survival_std(double z, double xi) {
  if (is_exponential(xi)) return -z;
  const double w = xi * z;
  if (w <= -1.0) return -kInf;
  return -std::log1p(w) / xi;
}

double log_pdf_std(double z, double xi) {
  if (is_exponential(xi)) return -z;
  const double w = xi * z;
  if (w < -1.0) return -kInf;
  const double power = -1.0 / xi - 1.0;
  if (w == -1.0) {
    // Upper endpoint for xi < 0.
    if (power > 0.0) return -kInf;
    if (power == 0.0) return 0.0;
    return kInf;
  }
  return power * std::log1p(w);
}

}  // namespace detail

double gpd_log_survival(double y, const GpdScale& p) {
  return detail::log_survival_std(standardize(y, p), p.xi);
}

double gpd_cdf(double y, const GpdScale& p) {
  const double z = standardize(y, p);
  if (y == upper_endpoint(p)) return 1.0;
  return -std::expm1(detail::log_survival_std(z, p.xi));
}

double gpd_log_pdf(double y, const GpdScale& p) {
  return detail::log_pdf_std(standardize(y, p), p.xi) - std::log(p.tau);
}

double gpd_pdf(double y, const GpdScale& p) { return std::exp(gpd_log_pdf(y, p)); }

double gpd_quantile(double q, const GpdScale& p) {
  validate(p);
  if (!(q >= 0.0 && q < 1.0)) {
    throw DomainError("gpd_quantile: probability " + std::to_string(q) + " outside [0, 1)");
  }
  const double log_tail = std::log1p(-q);
  double z;
  if (is_exponential(p.xi)) {
    z = -log_tail;
  } else {
    z = std::expm1(-p.xi * log_tail) / p.xi;
  }
  return p.alpha + p.tau * z;
}

double mean_quantile_level(double xi) {
  if (!(xi < 1.0)) throw DomainError("mean_quantile_level: the mean requires xi < 1");
  if (is_exponential(xi)) return -std::expm1(-1.0);
  return -std::expm1(std::log1p(-xi) / xi);
}

GpdScale excess_distribution(const GpdScale& p, double y_bullet) {
  validate(p);
  if (p.alpha != 0.0) throw DomainError("excess_distribution: requires a zero-located GPD");
  if (!(y_bullet >= 0.0) || y_bullet >= upper_endpoint(p)) {
    throw DomainError("excess_distribution: threshold outside the support");
  }
  return {p.tau + p.xi * y_bullet, p.xi, y_bullet};
}

double mean_over_threshold(const GpdMean& p, double y_bullet) {
  validate(p);
  if (!(y_bullet >= 0.0)) throw DomainError("mean_over_threshold: threshold must be >= 0");
  return p.mu + p.xi * y_bullet / (1.0 - p.xi) + y_bullet;
}

}  // namespace zitpo
