#pragma once

// Maximum-likelihood fitting of the ZITPo regression and the Wald / LRT
// inference built on it.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zitpo/model.hpp"
#include "zitpo/optimize.hpp"

namespace zitpo {

struct FitOptions {
  double gtol = 1e-6;
  double ftol = 1e-10;
  int max_iter = 500;
  /// Hold xi at this value instead of estimating it.
  std::optional<double> fixed_xi;
  bool trace = false;
  /// Retry once from a perturbed start when the first run does not converge.
  bool retry = true;
  std::uint64_t seed = 20100401;
};

struct FitResult {
  CoefVector coef;
  /// Standard errors for beta1, beta2 and xi, in that order. NaN when the
  /// fit did not converge; 0 for a held xi.
  Eigen::VectorXd se;
  /// Covariance on the natural scale, same ordering as se.
  Eigen::MatrixXd cov;
  double loglik = 0.0;
  std::size_t n_zero = 0;
  std::size_t n_pos = 0;
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
  std::string message;
  std::vector<TraceEntry> trace;

  // What was fitted; used to check nesting for likelihood-ratio tests.
  std::vector<std::string> names1;
  std::vector<std::string> names2;
  bool xi_fixed = false;
  double y_trunc = 0.0;
  std::uint64_t data_fingerprint = 0;

  /// Number of estimated parameters.
  Eigen::Index n_free() const;
  /// Stacked (beta1, beta2, xi).
  Eigen::VectorXd estimates() const;
  /// "pi:<col>", "mu:<col>", then "xi".
  std::vector<std::string> parameter_names() const;
};

/// Documented default starting point: logistic regression of 1{y > 0} on x1
/// (falls back to the logit of the positive fraction), log of the mean
/// positive response for the mu intercept, xi = 0.1.
CoefVector default_start(const Eigen::VectorXd& y, const ModelSpec& spec,
                         const FitOptions& opts = {});

FitResult fit_mle(const Eigen::VectorXd& y, double y_trunc, const ModelSpec& spec,
                  const std::optional<CoefVector>& init = {}, const FitOptions& opts = {});

/// Reduced-model coefficients placed into a wider model's columns, matched
/// by name; columns absent from the reduced fit start at zero. Gives a start
/// whose likelihood equals the reduced optimum.
CoefVector embed_coefficients(const FitResult& reduced, const ModelSpec& full);

/// Hash of the response and threshold, identifying "the same data".
std::uint64_t data_fingerprint(const Eigen::VectorXd& y, double y_trunc);

struct Interval {
  double lower;
  double upper;
};

/// Wald intervals estimate +- z_{(1+level)/2} * se, one per parameter.
std::vector<Interval> confidence_interval(const FitResult& fit, double level);

enum class TestKind { Wald, LRT };

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  TestKind kind = TestKind::Wald;
  std::string parameter;
};

/// z = estimate / se with p = 2 Phi(-|z|).
TestResult wald_test(double estimate, double se);
/// One test per estimated parameter (xi included unless held).
std::vector<TestResult> wald_test(const FitResult& fit);

/// Statistic 2 (l_full - l_reduced) against chi-square with df degrees.
TestResult lrt(double loglik_full, double loglik_reduced, int df);
TestResult lrt(const FitResult& full, const FitResult& reduced);

}  // namespace zitpo
