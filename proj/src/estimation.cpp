#include "zitpo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <string>

#include "zitpo/error.hpp"
#include "zitpo/probability.hpp"
#include "zitpo/rng.hpp"

namespace zitpo {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Optimization coordinates: (beta1, beta2, theta) with xi = 1 - exp(-theta).
struct Packing {
  Eigen::Index p1;
  Eigen::Index p2;
  std::optional<double> fixed_xi;

  Eigen::Index size() const { return p1 + p2 + (fixed_xi ? 0 : 1); }

  double xi_of(const Eigen::VectorXd& theta) const {
    return fixed_xi ? *fixed_xi : -std::expm1(-theta[p1 + p2]);
  }

  Eigen::VectorXd pack(const CoefVector& c) const {
    Eigen::VectorXd theta(size());
    theta.head(p1) = c.beta1;
    theta.segment(p1, p2) = c.beta2;
    if (!fixed_xi) theta[p1 + p2] = -std::log1p(-c.xi);
    return theta;
  }

  CoefVector unpack(const Eigen::VectorXd& theta) const {
    return {theta.head(p1), theta.segment(p1, p2), xi_of(theta)};
  }
};

std::optional<Eigen::VectorXd> logistic_irls(const Eigen::MatrixXd& x, const Eigen::VectorXd& t) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd w(eta.size());
    Eigen::VectorXd z(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double p = linkinv_logit(eta[i]);
      w[i] = std::max(p * (1.0 - p), 1e-10);
      z[i] = eta[i] + (t[i] - p) / w[i];
    }
    const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
    const Eigen::VectorXd next = (xtw * x).ldlt().solve(xtw * z);
    if (!next.allFinite() || next.cwiseAbs().maxCoeff() > 30.0) return std::nullopt;
    const double delta = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (delta < 1e-10) return beta;
  }
  return beta;
}

struct Attempt {
  BfgsResult opt;
  Eigen::MatrixXd hessian;
  bool hessian_ok = false;

  bool ok() const { return opt.converged && hessian_ok; }
};

}  // namespace

Eigen::Index FitResult::n_free() const {
  return coef.beta1.size() + coef.beta2.size() + (xi_fixed ? 0 : 1);
}

Eigen::VectorXd FitResult::estimates() const {
  Eigen::VectorXd out(coef.size());
  out << coef.beta1, coef.beta2, coef.xi;
  return out;
}

std::vector<std::string> FitResult::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& n : names1) out.push_back("pi:" + n);
  for (const auto& n : names2) out.push_back("mu:" + n);
  out.emplace_back("xi");
  return out;
}

std::uint64_t data_fingerprint(const Eigen::VectorXd& y, double y_trunc) {
  // FNV-1a over the raw bytes.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  };
  for (Eigen::Index i = 0; i < y.size(); ++i) feed(y[i]);
  feed(y_trunc);
  return h;
}

CoefVector default_start(const Eigen::VectorXd& y, const ModelSpec& spec, const FitOptions& opts) {
  const Eigen::VectorXd positive = (y.array() > 0.0).cast<double>();
  const double n_pos = positive.sum();
  const double n = static_cast<double>(y.size());

  CoefVector start;
  start.beta1 = Eigen::VectorXd::Zero(spec.x1.cols());
  if (auto beta = logistic_irls(spec.x1, positive)) {
    start.beta1 = *beta;
  } else {
    start.beta1[0] = std::log(n_pos / (n - n_pos));
  }
  start.beta2 = Eigen::VectorXd::Zero(spec.x2.cols());
  start.beta2[0] = std::log(y.sum() / n_pos);
  start.xi = opts.fixed_xi.value_or(0.1);
  return start;
}

FitResult fit_mle(const Eigen::VectorXd& y, double y_trunc, const ModelSpec& spec,
                  const std::optional<CoefVector>& init, const FitOptions& opts) {
  spec.validate();
  if (static_cast<std::size_t>(y.size()) != spec.rows()) {
    throw DimensionError("response has " + std::to_string(y.size()) + " rows, design has " +
                         std::to_string(spec.rows()));
  }
  if (opts.fixed_xi && !(*opts.fixed_xi < 1.0)) throw DomainError("held xi must be < 1");

  FitResult fit;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double v = y[i];
    if (!std::isfinite(v) || v < 0.0) throw DataError("response must be nonnegative", i);
    if (v > 0.0 && v <= y_trunc) throw DataError("observation lies in (0, y_trunc]", i);
    (v == 0.0 ? fit.n_zero : fit.n_pos)++;
  }
  if (fit.n_pos == 0) throw DataError("response is all zero; the positive part is not identified");
  if (fit.n_zero == 0) throw DataError("response has no zeros; the zero part is not identified");
  if (fit.n_pos < static_cast<std::size_t>(spec.x2.cols()) + 1) {
    throw DataError("too few positive observations (" + std::to_string(fit.n_pos) + ") for " +
                    std::to_string(spec.x2.cols()) + " mu coefficients");
  }
  require_full_rank(spec.x1, spec.names1, "pi");
  require_full_rank(spec.x2, spec.names2, "mu");

  fit.names1 = spec.names1;
  fit.names2 = spec.names2;
  fit.xi_fixed = opts.fixed_xi.has_value();
  fit.y_trunc = y_trunc;
  fit.data_fingerprint = data_fingerprint(y, y_trunc);

  const Packing packing{spec.x1.cols(), spec.x2.cols(), opts.fixed_xi};
  CoefVector start = init ? *init : default_start(y, spec, opts);
  if (start.beta1.size() != packing.p1 || start.beta2.size() != packing.p2) {
    throw DimensionError("starting coefficients do not match the design widths");
  }
  if (opts.fixed_xi) start.xi = *opts.fixed_xi;
  if (!(start.xi < 1.0)) throw DomainError("starting xi must be < 1");

  const Objective objective = [&](const Eigen::VectorXd& theta) {
    return detail::log_likelihood_kernel(y, y_trunc, spec.x1, spec.x2, theta.head(packing.p1),
                                         theta.segment(packing.p1, packing.p2),
                                         packing.xi_of(theta));
  };

  BfgsOptions bopts;
  bopts.gtol = opts.gtol;
  bopts.ftol = opts.ftol;
  bopts.max_iter = opts.max_iter;
  bopts.record_trace = opts.trace;

  auto run = [&](const Eigen::VectorXd& theta0) {
    Attempt a;
    try {
      a.opt = maximize_bfgs(objective, theta0, bopts);
    } catch (const NumericError& e) {
      a.opt.x = theta0;
      a.opt.value = -std::numeric_limits<double>::infinity();
      a.opt.message = e.what();
      return a;
    }
    if (a.opt.converged) {
      try {
        a.hessian = numeric_hessian(objective, a.opt.x);
        a.hessian_ok = (-a.hessian).llt().info() == Eigen::Success;
        if (!a.hessian_ok) a.opt.message = "Hessian at the optimum is not negative definite";
      } catch (const NumericError& e) {
        a.opt.message = std::string("Hessian evaluation failed: ") + e.what();
      }
    }
    return a;
  };

  const Eigen::VectorXd theta_start = packing.pack(start);
  Attempt best = run(theta_start);
  if (!best.ok() && opts.retry) {
    CounterRng rng(opts.seed);
    std::normal_distribution<double> jitter(0.0, 0.1);
    Eigen::VectorXd perturbed = theta_start;
    for (Eigen::Index j = 0; j < perturbed.size(); ++j) perturbed[j] += jitter(rng);
    Attempt second = run(perturbed);
    fit.restarts = 1;
    if (second.ok() || second.opt.value > best.opt.value) best = std::move(second);
  }

  fit.coef = packing.unpack(best.opt.x);
  fit.loglik = best.opt.value;
  fit.iterations = best.opt.iterations;
  fit.message = best.opt.message;
  fit.trace = std::move(best.opt.trace);
  fit.converged = best.ok();

  const Eigen::Index k = fit.coef.size();
  fit.cov = Eigen::MatrixXd::Constant(k, k, kNaN);
  fit.se = Eigen::VectorXd::Constant(k, kNaN);
  if (fit.converged) {
    const Eigen::Index m = packing.size();
    Eigen::MatrixXd cov_theta = (-best.hessian).llt().solve(Eigen::MatrixXd::Identity(m, m));
    // Delta method for xi = 1 - exp(-theta): d xi / d theta = 1 - xi.
    Eigen::VectorXd jac = Eigen::VectorXd::Ones(m);
    if (!packing.fixed_xi) jac[m - 1] = 1.0 - fit.coef.xi;
    cov_theta = jac.asDiagonal() * cov_theta * jac.asDiagonal();
    fit.cov.setZero();
    fit.cov.topLeftCorner(m, m) = 0.5 * (cov_theta + cov_theta.transpose());
    fit.se = fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }
  return fit;
}

CoefVector embed_coefficients(const FitResult& reduced, const ModelSpec& full) {
  auto place = [](const std::vector<std::string>& names, const Eigen::VectorXd& values,
                  const std::vector<std::string>& target) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(target.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
      const auto it = std::find(target.begin(), target.end(), names[j]);
      if (it == target.end()) {
        throw DomainError("column '" + names[j] + "' of the reduced model is not in the full model");
      }
      out[it - target.begin()] = values[static_cast<Eigen::Index>(j)];
    }
    return out;
  };
  return {place(reduced.names1, reduced.coef.beta1, full.names1),
          place(reduced.names2, reduced.coef.beta2, full.names2), reduced.coef.xi};
}

std::vector<Interval> confidence_interval(const FitResult& fit, double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  if (!fit.converged) throw DomainError("confidence intervals need a converged fit");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const Eigen::VectorXd est = fit.estimates();
  std::vector<Interval> out;
  out.reserve(static_cast<std::size_t>(est.size()));
  for (Eigen::Index j = 0; j < est.size(); ++j) {
    out.push_back({est[j] - z * fit.se[j], est[j] + z * fit.se[j]});
  }
  return out;
}

TestResult wald_test(double estimate, double se) {
  if (!(se > 0.0) || !std::isfinite(se)) throw DomainError("Wald test needs a positive standard error");
  TestResult t;
  t.kind = TestKind::Wald;
  t.statistic = estimate / se;
  t.p_value = normal_two_sided_p(t.statistic);
  return t;
}

std::vector<TestResult> wald_test(const FitResult& fit) {
  if (!fit.converged) throw DomainError("Wald tests need a converged fit");
  const Eigen::VectorXd est = fit.estimates();
  const auto names = fit.parameter_names();
  const Eigen::Index count = fit.xi_fixed ? est.size() - 1 : est.size();
  std::vector<TestResult> out;
  for (Eigen::Index j = 0; j < count; ++j) {
    TestResult t = wald_test(est[j], fit.se[j]);
    t.parameter = names[static_cast<std::size_t>(j)];
    out.push_back(std::move(t));
  }
  return out;
}

TestResult lrt(double loglik_full, double loglik_reduced, int df) {
  if (df < 0) throw DomainError("LRT needs df >= 0");
  double stat = 2.0 * (loglik_full - loglik_reduced);
  if (stat < -1e-8) {
    throw DomainError("LRT statistic " + std::to_string(stat) +
                      " is negative; the reduced fit beats the full fit");
  }
  stat = std::max(stat, 0.0);
  TestResult t;
  t.kind = TestKind::LRT;
  t.statistic = stat;
  t.df = df;
  t.p_value = df == 0 ? 1.0 : chi2_sf(stat, df);
  return t;
}

TestResult lrt(const FitResult& full, const FitResult& reduced) {
  if (full.data_fingerprint != reduced.data_fingerprint || full.y_trunc != reduced.y_trunc) {
    throw DomainError("LRT: the two fits were computed on different data");
  }
  auto subset = [](const std::vector<std::string>& small, const std::vector<std::string>& big) {
    return std::all_of(small.begin(), small.end(), [&](const std::string& s) {
      return std::find(big.begin(), big.end(), s) != big.end();
    });
  };
  if (!subset(reduced.names1, full.names1) || !subset(reduced.names2, full.names2)) {
    throw DomainError("LRT: reduced model columns are not a subset of the full model");
  }
  if (full.xi_fixed && (!reduced.xi_fixed || full.coef.xi != reduced.coef.xi)) {
    throw DomainError("LRT: full model holds xi but the reduced model does not");
  }
  return lrt(full.loglik, reduced.loglik, static_cast<int>(full.n_free() - reduced.n_free()));
}

}  // namespace zitpo
