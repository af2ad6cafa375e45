#include "zitpo/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "summation.hpp"
#include "zitpo/error.hpp"
#include "zitpo/gpd.hpp"

namespace zitpo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log of the ZITPo mass / density for one row given its linear predictors.
double row_log_density(double y, double y_trunc, double eta1, double eta2, double xi) {
  const double log_pi = detail::log_logistic(eta1);
  const double inv_tau = std::exp(-eta2) / (1.0 - xi);
  if (y == 0.0) {
    if (y_trunc == 0.0) return detail::log_logistic_complement(eta1);
    const double log_surv = detail::log_survival_std(y_trunc * inv_tau, xi);
    return detail::log1mexp(log_pi + log_surv);
  }
  return log_pi - eta2 - std::log1p(-xi) + detail::log_pdf_std(y * inv_tau, xi);
}

void check_observation(double y, double y_trunc, std::size_t row) {
  if (!std::isfinite(y) || y < 0.0) {
    throw DataError("response must be a nonnegative finite number", row);
  }
  if (y > 0.0 && y <= y_trunc) {
    throw DataError("observation " + std::to_string(y) + " lies in (0, y_trunc=" +
                        std::to_string(y_trunc) + "] and violates the truncation model",
                    row);
  }
}

void check_dims(const ModelSpec& spec, const CoefVector& coef) {
  spec.validate();
  if (spec.x1.cols() != coef.beta1.size()) {
    throw DimensionError("beta1 has " + std::to_string(coef.beta1.size()) +
                         " entries but the pi design has " + std::to_string(spec.x1.cols()) +
                         " columns");
  }
  if (spec.x2.cols() != coef.beta2.size()) {
    throw DimensionError("beta2 has " + std::to_string(coef.beta2.size()) +
                         " entries but the mu design has " + std::to_string(spec.x2.cols()) +
                         " columns");
  }
  if (!coef.beta1.allFinite() || !coef.beta2.allFinite() || !std::isfinite(coef.xi)) {
    throw DomainError("coefficients must be finite");
  }
  if (!(coef.xi < 1.0)) throw DomainError("shape xi must be < 1");
}

}  // namespace

namespace detail {

double log1mexp(double a) {
  if (a > -0.6931471805599453) return std::log(-std::expm1(a));
  return std::log1p(-std::exp(a));
}

double log_logistic(double eta) {
  if (eta >= 0.0) return -std::log1p(std::exp(-eta));
  return eta - std::log1p(std::exp(eta));
}

double log_logistic_complement(double eta) { return log_logistic(-eta); }

double log_likelihood_kernel(const Eigen::VectorXd& y, double y_trunc, const Eigen::MatrixXd& x1,
                             const Eigen::MatrixXd& x2, const Eigen::VectorXd& beta1,
                             const Eigen::VectorXd& beta2, double xi) {
  if (!(xi < 1.0) || !std::isfinite(xi)) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::VectorXd eta1 = x1 * beta1;
  const Eigen::VectorXd eta2 = x2 * beta2;
  CompensatedSum total;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double term = row_log_density(y[i], y_trunc, eta1[i], eta2[i], xi);
    if (!std::isfinite(term)) return term == -kInf ? -kInf : std::numeric_limits<double>::quiet_NaN();
    total.add(term);
  }
  return total.value();
}

}  // namespace detail

void validate(const ZitpoParams& p) {
  if (!(p.pi > 0.0 && p.pi < 1.0)) throw DomainError("zitpo: pi must lie in (0, 1)");
  if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw DomainError("zitpo: mu must be positive");
  if (!(p.xi < 1.0) || !std::isfinite(p.xi)) throw DomainError("zitpo: xi must be < 1");
  if (!(p.y_trunc >= 0.0) || !std::isfinite(p.y_trunc)) {
    throw DomainError("zitpo: y_trunc must be nonnegative");
  }
}

double linkinv_logit(double eta) {
  if (eta > 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double linkinv_log(double eta) {
  const double mu = std::exp(eta);
  if (!std::isfinite(mu) || mu <= 0.0) {
    throw NumericError("log link: exp(" + std::to_string(eta) + ") is not a positive finite number");
  }
  return mu;
}

double zero_prob(const ZitpoParams& p) {
  validate(p);
  if (p.y_trunc == 0.0) return 1.0 - p.pi;
  const double z = p.y_trunc / (p.mu * (1.0 - p.xi));
  return 1.0 - p.pi * std::exp(detail::log_survival_std(z, p.xi));
}

double DensityValue::value() const { return std::exp(log_value_); }

DensityValue density(double y, const ZitpoParams& p) {
  validate(p);
  if (!(y >= 0.0)) throw DomainError("zitpo density: y must be nonnegative");
  if (y > 0.0 && y <= p.y_trunc) {
    throw DomainError("zitpo density: y=" + std::to_string(y) + " lies in (0, y_trunc]");
  }
  const double tau = p.mu * (1.0 - p.xi);
  if (y == 0.0) {
    const double log_surv = detail::log_survival_std(p.y_trunc / tau, p.xi);
    return {DensityValue::Kind::PointMass, detail::log1mexp(std::log(p.pi) + log_surv)};
  }
  return {DensityValue::Kind::Density,
          std::log(p.pi) - std::log(tau) + detail::log_pdf_std(y / tau, p.xi)};
}

double log_density(double y, const ZitpoParams& p) { return density(y, p).log_value(); }

DensityValue density_shifted(double y, double pi_b, double mu_b, double xi, double y_bullet,
                             double y_trunc) {
  if (!(pi_b > 0.0 && pi_b < 1.0)) throw DomainError("density_shifted: pi must lie in (0, 1)");
  if (!(xi < 1.0)) throw DomainError("density_shifted: xi must be < 1");
  if (!(y_bullet >= 0.0)) throw DomainError("density_shifted: y_bullet must be nonnegative");
  if (!(y_bullet <= y_trunc)) throw DomainError("density_shifted: requires y_bullet <= y_trunc");
  if (!(mu_b > y_bullet)) throw DomainError("density_shifted: requires mu_b > y_bullet");
  if (!(y >= 0.0)) throw DomainError("density_shifted: y must be nonnegative");
  if (y > 0.0 && y <= y_trunc) {
    throw DomainError("density_shifted: y=" + std::to_string(y) + " lies in (0, y_trunc]");
  }
  const double tau = (mu_b - y_bullet) * (1.0 - xi);
  if (y == 0.0) {
    const double log_surv = detail::log_survival_std((y_trunc - y_bullet) / tau, xi);
    return {DensityValue::Kind::PointMass, detail::log1mexp(std::log(pi_b) + log_surv)};
  }
  return {DensityValue::Kind::Density,
          std::log(pi_b) - std::log(tau) + detail::log_pdf_std((y - y_bullet) / tau, xi)};
}

void ModelSpec::validate() const {
  if (x1.rows() != x2.rows()) {
    throw DimensionError("pi design has " + std::to_string(x1.rows()) + " rows, mu design has " +
                         std::to_string(x2.rows()));
  }
  if (x1.cols() < 1 || x2.cols() < 1) throw DimensionError("each design needs an intercept column");
  if (static_cast<Eigen::Index>(names1.size()) != x1.cols() ||
      static_cast<Eigen::Index>(names2.size()) != x2.cols()) {
    throw DimensionError("column names do not match the design widths");
  }
  if (!x1.allFinite() || !x2.allFinite()) throw DimensionError("design contains non-finite entries");
  if ((x1.col(0).array() != 1.0).any() || (x2.col(0).array() != 1.0).any()) {
    throw DimensionError("first design column must be the all-ones intercept");
  }
}

void require_full_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names,
                       const std::string& label) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() == x.cols()) return;
  std::string cols;
  for (Eigen::Index k = qr.rank(); k < x.cols(); ++k) {
    const auto idx = static_cast<std::size_t>(qr.colsPermutation().indices()[k]);
    if (!cols.empty()) cols += ", ";
    cols += idx < names.size() ? names[idx] : std::to_string(idx);
  }
  throw DataError("rank-deficient " + label + " design; dependent columns: " + cols);
}

ModelSpec intercept_only(std::size_t n) {
  const auto rows = static_cast<Eigen::Index>(n);
  return {Eigen::MatrixXd::Ones(rows, 1), Eigen::MatrixXd::Ones(rows, 1), {"(Intercept)"},
          {"(Intercept)"}};
}

std::vector<RowParams> predict(const ModelSpec& spec, const CoefVector& coef) {
  check_dims(spec, coef);
  const Eigen::VectorXd eta1 = spec.x1 * coef.beta1;
  const Eigen::VectorXd eta2 = spec.x2 * coef.beta2;
  std::vector<RowParams> out(spec.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out[i].pi = linkinv_logit(eta1[r]);
    try {
      out[i].mu = linkinv_log(eta2[r]);
    } catch (const NumericError& e) {
      throw DataError(e.what(), i);
    }
  }
  return out;
}

double log_likelihood(const Eigen::VectorXd& y, double y_trunc, const ModelSpec& spec,
                      const CoefVector& coef) {
  check_dims(spec, coef);
  if (static_cast<std::size_t>(y.size()) != spec.rows()) {
    throw DimensionError("response has " + std::to_string(y.size()) + " rows, design has " +
                         std::to_string(spec.rows()));
  }
  if (!(y_trunc >= 0.0) || !std::isfinite(y_trunc)) throw DomainError("y_trunc must be >= 0");
  const Eigen::VectorXd eta1 = spec.x1 * coef.beta1;
  const Eigen::VectorXd eta2 = spec.x2 * coef.beta2;
  detail::CompensatedSum total;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    check_observation(y[i], y_trunc, row);
    const double term = row_log_density(y[i], y_trunc, eta1[i], eta2[i], coef.xi);
    if (!std::isfinite(term)) throw DataError("log-likelihood contribution is not finite", row);
    total.add(term);
  }
  return total.value();
}

}  // namespace zitpo
