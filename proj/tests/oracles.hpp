#pragma once

// Reference computations that do not go through the library code paths
// under test: adaptive quadrature, central differences, bisection, a plain
// closed-form GPD and Kolmogorov-Smirnov distances for samples.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

/// Integral of f over [a, b]; b may be +inf.
template <class F>
double integrate(F f, double a, double b) {
  if (std::isinf(b)) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(f, a, b, 1e-13);
  }
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

template <class F>
double central_difference(F f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Solves f(x) = target for nondecreasing f on [lo, hi].
template <class F>
double bisect(F f, double target, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// F(y) = 1 - (1 + xi y / tau)^(-1/xi), written directly from the definition.
inline double plain_gpd_cdf(double y, double tau, double xi) {
  if (xi == 0.0) return 1.0 - std::exp(-y / tau);
  const double base = 1.0 + xi * y / tau;
  if (base <= 0.0) return 1.0;
  return 1.0 - std::pow(base, -1.0 / xi);
}

inline double plain_gpd_pdf(double y, double tau, double xi) {
  if (xi == 0.0) return std::exp(-y / tau) / tau;
  const double base = 1.0 + xi * y / tau;
  if (base <= 0.0) return 0.0;
  return std::pow(base, -1.0 / xi - 1.0) / tau;
}

/// Inverse transform draw of a zero-located GPD from a uniform on (0, 1).
inline double plain_gpd_draw(double u, double tau, double xi) {
  if (xi == 0.0) return -tau * std::log1p(-u);
  return tau / xi * (std::pow(1.0 - u, -xi) - 1.0);
}

/// sup |F_n - F| for a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic 1% critical value of the one-sample KS distance.
inline double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("zitpo_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
