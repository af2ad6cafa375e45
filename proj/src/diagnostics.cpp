#include "zitpo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zitpo/error.hpp"
#include "zitpo/gpd.hpp"

namespace zitpo {

ResidualSet pareto_residuals(const Eigen::VectorXd& y, double y_trunc, const Eigen::VectorXd& mu,
                             double xi) {
  if (y.size() != mu.size()) throw DimensionError("residuals: y and mu differ in length");
  if (!(xi < 1.0)) throw DomainError("residuals: xi must be < 1");
  ResidualSet rs;
  rs.xi_hat = xi;
  std::vector<double> values;
  const double shift = xi * y_trunc / (1.0 - xi);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > y_trunc)) continue;
    rs.row_ids.push_back(static_cast<std::size_t>(i));
    values.push_back((y[i] - y_trunc) / (mu[i] + shift));
  }
  const std::size_t n = values.size();
  rs.residuals = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(n));
  rs.order.resize(n);
  std::iota(rs.order.begin(), rs.order.end(), std::size_t{0});
  std::stable_sort(rs.order.begin(), rs.order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  rs.ordered.resize(static_cast<Eigen::Index>(n));
  rs.theoretical_q.resize(static_cast<Eigen::Index>(n));
  const GpdScale unit = to_scale(GpdMean{1.0, xi});
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    rs.ordered[k] = values[rs.order[i]];
    rs.theoretical_q[k] = gpd_quantile((static_cast<double>(i) + 0.5) / static_cast<double>(n), unit);
  }
  return rs;
}

ResidualSet residuals(const Eigen::VectorXd& y, double y_trunc, const FitResult& fit,
                      const ModelSpec& spec) {
  if (!fit.converged) throw DomainError("residuals need a converged fit");
  const auto rows = predict(spec, fit.coef);
  Eigen::VectorXd mu(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) mu[static_cast<Eigen::Index>(i)] = rows[i].mu;
  return pareto_residuals(y, y_trunc, mu, fit.coef.xi);
}

std::vector<QQRow> qq_data(const ResidualSet& rs) {
  std::vector<QQRow> out;
  out.reserve(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double emp = rs.ordered[k];
    const double theo = rs.theoretical_q[k];
    out.push_back({rs.row_ids[rs.order[i]], emp, emp, theo, std::log(emp), std::log(theo)});
  }
  return out;
}

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw DimensionError("correlation needs two vectors of equal length >= 2");
  }
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

double qq_correlation(const ResidualSet& rs) { return pearson_correlation(rs.ordered, rs.theoretical_q); }

double ks_statistic(const ResidualSet& rs) {
  const std::size_t n = rs.size();
  if (n == 0) throw DomainError("ks_statistic: no residuals");
  const GpdScale unit = to_scale(GpdMean{1.0, rs.xi_hat});
  const double upper = upper_endpoint(unit);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rs.ordered[static_cast<Eigen::Index>(i)];
    const double cdf = x >= upper ? 1.0 : gpd_cdf(x, unit);
    const double lo = static_cast<double>(i) / static_cast<double>(n);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    d = std::max({d, hi - cdf, cdf - lo});
  }
  return d;
}

std::vector<CalibrationBin> zero_calibration(const Eigen::VectorXd& y, double y_trunc,
                                             const FitResult& fit, const ModelSpec& spec,
                                             std::size_t groups) {
  if (groups == 0) throw DomainError("zero_calibration: need at least one group");
  const auto rows = predict(spec, fit.coef);
  if (static_cast<std::size_t>(y.size()) != rows.size()) {
    throw DimensionError("zero_calibration: response and design differ in length");
  }
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].pi < rows[b].pi; });
  groups = std::min(groups, rows.size());
  std::vector<CalibrationBin> out(groups);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t g = k * groups / idx.size();
    const std::size_t i = idx[k];
    CalibrationBin& bin = out[g];
    ++bin.count;
    bin.mean_pi += rows[i].pi;
    bin.predicted_zero += zero_prob({rows[i].pi, rows[i].mu, fit.coef.xi, y_trunc});
    bin.observed_zero += y[static_cast<Eigen::Index>(i)] == 0.0 ? 1.0 : 0.0;
  }
  for (auto& bin : out) {
    const double c = static_cast<double>(bin.count);
    bin.mean_pi /= c;
    bin.predicted_zero /= c;
    bin.observed_zero /= c;
  }
  return out;
}

}  // namespace zitpo
