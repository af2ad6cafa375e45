#pragma once

// Zero-inflated truncated generalized Pareto (ZITPo) model.
//
// An observation is zero with probability 1 - pi * S(y_trunc), where S is the
// survival function of GPD(mean mu, shape xi); otherwise it is an exact value
// above y_trunc with density pi * f(y). pi and mu are tied to covariates by
// logit and log links respectively.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zitpo {

struct ZitpoParams {
  double pi = 0.5;       // P(Y* > 0)
  double mu = 1.0;       // E[Y* | Y* > 0]
  double xi = 0.0;
  double y_trunc = 0.0;  // values in (0, y_trunc] are recorded as zero
};

void validate(const ZitpoParams& p);

double linkinv_logit(double eta);
/// Throws NumericError when exp(eta) is not a positive finite number.
double linkinv_log(double eta);

/// P(Y = 0) = (1 - pi) + pi * F(y_trunc).
double zero_prob(const ZitpoParams& p);

/// A point mass at zero or a Lebesgue density above the threshold. The two
/// carry different units, so they are kept apart by the tag.
class DensityValue {
 public:
  enum class Kind { PointMass, Density };

  DensityValue(Kind kind, double log_value) : kind_(kind), log_value_(log_value) {}

  Kind kind() const { return kind_; }
  bool is_mass() const { return kind_ == Kind::PointMass; }
  double log_value() const { return log_value_; }
  double value() const;

 private:
  Kind kind_;
  double log_value_;
};

/// y must be 0 or strictly above p.y_trunc.
DensityValue density(double y, const ZitpoParams& p);
double log_density(double y, const ZitpoParams& p);

/// Three-parameter variant: the positive part is GPD located at y_bullet with
/// mean mu_b, and pi_b = P(Y* > y_bullet).
DensityValue density_shifted(double y, double pi_b, double mu_b, double xi, double y_bullet,
                             double y_trunc);

struct ModelSpec {
  Eigen::MatrixXd x1;  // design for pi, first column all ones
  Eigen::MatrixXd x2;  // design for mu, first column all ones
  std::vector<std::string> names1;
  std::vector<std::string> names2;

  std::size_t rows() const { return static_cast<std::size_t>(x1.rows()); }
  /// Shapes, finiteness, name counts. Rank is checked by the estimator.
  void validate() const;
};

/// Throws DataError listing the dependent columns when x is rank deficient.
void require_full_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names,
                       const std::string& label);

/// Intercept-only spec with n rows.
ModelSpec intercept_only(std::size_t n);

struct CoefVector {
  Eigen::VectorXd beta1;
  Eigen::VectorXd beta2;
  double xi = 0.0;

  Eigen::Index size() const { return beta1.size() + beta2.size() + 1; }
};

struct RowParams {
  double pi;
  double mu;
};

std::vector<RowParams> predict(const ModelSpec& spec, const CoefVector& coef);

double log_likelihood(const Eigen::VectorXd& y, double y_trunc, const ModelSpec& spec,
                      const CoefVector& coef);

namespace detail {

/// Likelihood kernel used inside the optimizer. No validation; returns -inf
/// or NaN instead of throwing when the point is infeasible.
double log_likelihood_kernel(const Eigen::VectorXd& y, double y_trunc, const Eigen::MatrixXd& x1,
                             const Eigen::MatrixXd& x2, const Eigen::VectorXd& beta1,
                             const Eigen::VectorXd& beta2, double xi);

/// log(1 - exp(a)) for a <= 0.
double log1mexp(double a);
/// log(logistic(eta)) and log(1 - logistic(eta)).
double log_logistic(double eta);
double log_logistic_complement(double eta);

}  // namespace detail

}  // namespace zitpo
