#pragma once

#include <cstddef>

namespace zitpo {

double normal_cdf(double z);
/// Inverse standard normal CDF, p in (0, 1).
double normal_quantile(double p);
/// Two-sided normal tail probability 2 * Phi(-|z|).
double normal_two_sided_p(double z);

/// Upper tail of the chi-square distribution with df degrees of freedom.
double chi2_sf(double x, double df);

/// Asymptotic Kolmogorov tail P(K > lambda).
double kolmogorov_sf(double lambda);
/// Approximate p-value of a one-sample KS statistic d at sample size n
/// (Stephens' small-sample correction on the Kolmogorov limit).
double ks_pvalue(double d, std::size_t n);

}  // namespace zitpo
