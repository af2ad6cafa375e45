#include "zitpo/probability.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "zitpo/error.hpp"

namespace zitpo {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: probability " + std::to_string(p) + " outside (0, 1)");
  }
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double chi2_sf(double x, double df) {
  if (!(df > 0.0)) throw DomainError("chi2_sf: degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  // The alternating series converges slowly for small lambda; use the
  // theta-function form there.
  if (lambda < 1.18) {
    const double pi = 3.141592653589793;
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double cdf = 0.0;
    for (int k = 1; k < 40; k += 2) cdf += std::pow(y, k * k);
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return 1.0 - cdf;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

double ks_pvalue(double d, std::size_t n) {
  if (n == 0) throw DomainError("ks_pvalue: empty sample");
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace zitpo
