#pragma once

// Pareto residuals of the positive part. Under the model
//   eps_i = (y_i - y_trunc) / (mu_i + xi y_trunc / (1 - xi))
// is exactly GPD(mean 1, xi) for every observed positive y_i.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "zitpo/estimation.hpp"
#include "zitpo/model.hpp"

namespace zitpo {

struct ResidualSet {
  std::vector<std::size_t> row_ids;  // data row of each residual
  Eigen::VectorXd residuals;         // in data-row order
  double xi_hat = 0.0;
  std::vector<std::size_t> order;    // positions into residuals, ascending
  Eigen::VectorXd ordered;
  Eigen::VectorXd theoretical_q;     // GPD(1, xi_hat) at (i - 0.5) / n

  std::size_t size() const { return row_ids.size(); }
};

/// Residuals for given per-row means (length n, only positive rows used).
ResidualSet pareto_residuals(const Eigen::VectorXd& y, double y_trunc, const Eigen::VectorXd& mu,
                             double xi);

/// Residuals of a converged fit.
ResidualSet residuals(const Eigen::VectorXd& y, double y_trunc, const FitResult& fit,
                      const ModelSpec& spec);

struct QQRow {
  std::size_t row_id;
  double residual;
  double empirical_q;
  double theoretical_q;
  double log_empirical_q;
  double log_theoretical_q;
};

std::vector<QQRow> qq_data(const ResidualSet& rs);

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Correlation of the QQ pairs.
double qq_correlation(const ResidualSet& rs);

/// sup |F_n - F| against GPD(mean 1, xi_hat). Descriptive: no correction
/// for estimated parameters.
double ks_statistic(const ResidualSet& rs);

/// Predicted against observed zero fractions in equal-count groups of the
/// fitted pi (zero-part calibration).
struct CalibrationBin {
  std::size_t count = 0;
  double mean_pi = 0.0;
  double predicted_zero = 0.0;
  double observed_zero = 0.0;
};

std::vector<CalibrationBin> zero_calibration(const Eigen::VectorXd& y, double y_trunc,
                                             const FitResult& fit, const ModelSpec& spec,
                                             std::size_t groups = 10);

}  // namespace zitpo
