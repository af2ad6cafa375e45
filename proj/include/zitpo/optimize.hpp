#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zitpo {

using Objective = std::function<double(const Eigen::VectorXd&)>;

inline const double kGradientStep = std::cbrt(std::numeric_limits<double>::epsilon());
inline const double kHessianStep = std::pow(std::numeric_limits<double>::epsilon(), 0.25);

/// Central differences with per-coordinate step h * max(1, |x_j|). Throws
/// NumericError naming the coordinate if any probe is non-finite.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x,
                                 double h = kGradientStep);

/// Central second differences, symmetrized.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x,
                                double h = kHessianStep);

struct BfgsOptions {
  double gtol = 1e-6;   // max-norm of the gradient
  double ftol = 1e-10;  // relative change of the objective on the last step
  int max_iter = 500;
  bool record_trace = false;
};

struct TraceEntry {
  int iteration;
  double value;
  double grad_norm;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<TraceEntry> trace;
};

/// Quasi-Newton maximization of f with numerical gradients and a
/// backtracking Armijo line search. f may return -inf or NaN at infeasible
/// points; the line search steps back from them.
BfgsResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& opts = {});

}  // namespace zitpo
