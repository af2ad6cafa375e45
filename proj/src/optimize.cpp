#include "zitpo/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zitpo/error.hpp"

namespace zitpo {
namespace {

double eval_checked(const Objective& f, const Eigen::VectorXd& x, Eigen::Index coord) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw NumericError("objective is not finite when perturbing coordinate " +
                       std::to_string(coord));
  }
  return v;
}

// Step actually taken in floating point, so that (x + h) - x == h exactly.
double exact_step(double x, double h) {
  volatile double shifted = x + h;
  return shifted - x;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = exact_step(x[j], h * std::max(1.0, std::abs(x[j])));
    probe[j] = x[j] + step;
    const double up = eval_checked(f, probe, j);
    probe[j] = x[j] - step;
    const double down = eval_checked(f, probe, j);
    probe[j] = x[j];
    grad[j] = (up - down) / (2.0 * step);
  }
  return grad;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double h) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd steps(n);
  for (Eigen::Index j = 0; j < n; ++j) steps[j] = exact_step(x[j], h * std::max(1.0, std::abs(x[j])));

  const double center = eval_checked(f, x, -1);
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    probe[i] = x[i] + steps[i];
    const double up = eval_checked(f, probe, i);
    probe[i] = x[i] - steps[i];
    const double down = eval_checked(f, probe, i);
    probe[i] = x[i];
    hess(i, i) = (up - 2.0 * center + down) / (steps[i] * steps[i]);

    for (Eigen::Index j = 0; j < i; ++j) {
      double corners[4];
      int k = 0;
      for (const double si : {1.0, -1.0}) {
        for (const double sj : {1.0, -1.0}) {
          probe[i] = x[i] + si * steps[i];
          probe[j] = x[j] + sj * steps[j];
          corners[k++] = eval_checked(f, probe, i);
        }
      }
      probe[i] = x[i];
      probe[j] = x[j];
      hess(i, j) = (corners[0] - corners[1] - corners[2] + corners[3]) / (4.0 * steps[i] * steps[j]);
      hess(j, i) = hess(i, j);
    }
  }
  return 0.5 * (hess + hess.transpose());
}

BfgsResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts) {
  // Internally minimizes phi = -f.
  const Objective phi = [&f](const Eigen::VectorXd& x) { return -f(x); };
  const Eigen::Index n = x0.size();
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;

  BfgsResult res;
  Eigen::VectorXd x = x0;
  double fx = phi(x);
  if (!std::isfinite(fx)) {
    res.x = x;
    res.value = -fx;
    res.message = "objective is not finite at the starting point";
    return res;
  }
  Eigen::VectorXd g = numeric_gradient(phi, x);
  Eigen::MatrixXd inv_hess = Eigen::MatrixXd::Identity(n, n);
  bool fresh_metric = true;
  double last_rel_change = 0.0;

  int iter = 0;
  for (;; ++iter) {
    if (opts.record_trace) res.trace.push_back({iter, -fx, max_abs(g)});
    if (max_abs(g) < opts.gtol && last_rel_change < opts.ftol) {
      res.converged = true;
      res.message = "converged";
      break;
    }
    if (iter >= opts.max_iter) {
      res.message = "iteration limit reached";
      break;
    }

    Eigen::VectorXd dir = -inv_hess * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      inv_hess.setIdentity();
      fresh_metric = true;
      dir = -g;
      slope = g.dot(dir);
    }

    // Backtracking with safeguarded quadratic interpolation.
    double alpha = 1.0;
    if (fresh_metric) alpha = std::min(1.0, 1.0 / std::max(1.0, dir.norm()));
    bool accepted = false;
    Eigen::VectorXd x_new;
    Eigen::VectorXd g_new;
    double f_new = 0.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      x_new = x + alpha * dir;
      f_new = phi(x_new);
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * alpha * slope) {
        try {
          g_new = numeric_gradient(phi, x_new);
          accepted = true;
          break;
        } catch (const NumericError&) {
          // A gradient probe left the feasible region; shorten the step.
        }
      }
      double next = 0.5 * alpha;
      if (std::isfinite(f_new)) {
        const double denom = 2.0 * (f_new - fx - slope * alpha);
        if (denom > 0.0) next = std::clamp(-slope * alpha * alpha / denom, 0.1 * alpha, 0.5 * alpha);
      }
      alpha = next;
    }

    if (!accepted) {
      if (!fresh_metric) {
        inv_hess.setIdentity();
        fresh_metric = true;
        continue;
      }
      res.message = "line search failed to improve the objective";
      break;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (fresh_metric) inv_hess *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hess * yv;
      inv_hess += (rho * rho * yv.dot(hy) + rho) * (s * s.transpose()) -
                  rho * (hy * s.transpose() + s * hy.transpose());
      fresh_metric = false;
    }

    last_rel_change = std::abs(f_new - fx) / std::max(1.0, std::abs(fx));
    x = x_new;
    fx = f_new;
    g = g_new;
  }

  res.x = x;
  res.value = -fx;
  res.gradient = -g;
  res.iterations = iter;
  return res;
}

}  // namespace zitpo
