#include "zitpo/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <string>
#include <thread>

#include "zitpo/error.hpp"
#include "zitpo/gpd.hpp"
#include "zitpo/probability.hpp"
#include "zitpo/rng.hpp"

namespace zitpo {

double rtrunc_gpd(double u, double mu, double xi, double y_trunc) {
  if (u == 0.0) throw DomainError("rtrunc_gpd: u = 0 maps to an infinite draw");
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("rtrunc_gpd: u must lie in (0, 1]");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("rtrunc_gpd: mu must be positive");
  if (!(xi < 1.0)) throw DomainError("rtrunc_gpd: xi must be < 1");
  if (!(y_trunc >= 0.0)) throw DomainError("rtrunc_gpd: y_trunc must be nonnegative");
  if (u == 1.0) return y_trunc;
  const double log_u = std::log(u);
  if (std::abs(xi) < kXiLimit) return -log_u * mu + y_trunc;
  const double standard = std::expm1(-xi * log_u) * (1.0 - xi) / xi;
  return standard * (mu + xi * y_trunc / (1.0 - xi)) + y_trunc;
}

std::vector<CovariateSpec> default_recipe() {
  return {
      {CovariateKind::Normal, -2.0, 1.0, false, "normal"},
      {CovariateKind::Poisson, 1.0, 0.0, false, "poisson"},
      {CovariateKind::Bernoulli, 0.5, 0.0, false, "binom1"},
      {CovariateKind::Bernoulli, 0.5, 0.0, false, "binom2"},
      {CovariateKind::Exponential, 1.0, 0.0, false, "exponential"},
  };
}

void SimConfig::validate() const {
  if (n < 1) throw DomainError("simulation: n must be >= 1");
  if (reps < 1) throw DomainError("simulation: reps must be >= 1");
  if (!(xi < 1.0)) throw DomainError("simulation: xi must be < 1");
  if (!(y_trunc >= 0.0)) throw DomainError("simulation: y_trunc must be nonnegative");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("simulation: level must lie in (0, 1)");
  const auto width = static_cast<Eigen::Index>(recipe.size()) + 1;
  if (beta1.size() != width || beta2.size() != width) {
    throw DimensionError("simulation: recipe has " + std::to_string(recipe.size()) +
                         " covariates but the coefficient vectors have " +
                         std::to_string(beta1.size()) + " and " + std::to_string(beta2.size()) +
                         " entries");
  }
}

SimConfig reference_design(std::size_t n, double xi, std::size_t reps, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.reps = reps;
  cfg.xi = xi;
  cfg.seed = seed;
  cfg.y_trunc = 0.125;
  cfg.beta1 = (Eigen::VectorXd(6) << 1.0, 1.0, -0.5, 0.5, 0.25, 0.25).finished();
  cfg.beta2 = (Eigen::VectorXd(6) << 2.0, 1.0, 0.5, 0.5, 0.25, 0.25).finished();
  return cfg;
}

SimulatedData simulate_dataset(const SimConfig& cfg, std::size_t rep_index) {
  cfg.validate();
  CounterRng rng(CounterRng::stream_key(cfg.seed, rep_index));
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto p = static_cast<Eigen::Index>(cfg.recipe.size()) + 1;

  Eigen::MatrixXd x(n, p);
  x.col(0).setOnes();
  std::vector<std::string> names{"(Intercept)"};
  for (Eigen::Index j = 1; j < p; ++j) {
    const CovariateSpec& c = cfg.recipe[static_cast<std::size_t>(j - 1)];
    names.push_back(c.name.empty() ? "x" + std::to_string(j) : c.name);
    auto column = x.col(j);
    switch (c.kind) {
      case CovariateKind::Normal: {
        std::normal_distribution<double> d(c.a, c.b);
        for (Eigen::Index i = 0; i < n; ++i) column[i] = d(rng);
        break;
      }
      case CovariateKind::Poisson: {
        std::poisson_distribution<int> d(c.a);
        for (Eigen::Index i = 0; i < n; ++i) column[i] = d(rng);
        break;
      }
      case CovariateKind::Bernoulli: {
        std::bernoulli_distribution d(c.a);
        for (Eigen::Index i = 0; i < n; ++i) column[i] = d(rng) ? 1.0 : 0.0;
        break;
      }
      case CovariateKind::Exponential: {
        std::exponential_distribution<double> d(1.0 / c.a);
        for (Eigen::Index i = 0; i < n; ++i) column[i] = d(rng);
        break;
      }
    }
    if (c.standardize && n > 1) {
      const double mean = column.mean();
      column.array() -= mean;
      const double sd = std::sqrt(column.squaredNorm() / static_cast<double>(n - 1));
      if (sd > 0.0) column /= sd;
    }
  }

  SimulatedData out;
  out.spec = ModelSpec{x, x, names, names};
  out.truth = predict(out.spec, CoefVector{cfg.beta1, cfg.beta2, cfg.xi});
  out.y = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RowParams& row = out.truth[static_cast<std::size_t>(i)];
    // Two uniforms per row whatever the outcome, so rows stay aligned.
    const double v = rng.uniform_open_closed();
    const double u = rng.uniform_open_closed();
    if (v > row.pi) continue;  // P(v <= pi) = pi on the (0, 1] grid
    ++out.n_latent_positive;
    const double latent = rtrunc_gpd(u, row.mu, cfg.xi, 0.0);
    if (latent > cfg.y_trunc) {
      out.y[i] = latent;
    } else {
      ++out.n_truncated;
    }
  }
  return out;
}

std::vector<ParameterSummary> summarize(const SimConfig& cfg,
                                        const std::vector<ReplicateRecord>& records) {
  Eigen::VectorXd truth(cfg.beta1.size() + cfg.beta2.size() + 1);
  truth << cfg.beta1, cfg.beta2, cfg.xi;

  std::vector<std::string> names;
  for (const char* part : {"pi:", "mu:"}) {
    names.push_back(std::string(part) + "(Intercept)");
    for (std::size_t j = 0; j < cfg.recipe.size(); ++j) {
      const auto& c = cfg.recipe[j];
      names.push_back(std::string(part) + (c.name.empty() ? "x" + std::to_string(j + 1) : c.name));
    }
  }
  names.emplace_back("xi");

  std::vector<ParameterSummary> out;
  for (Eigen::Index k = 0; k < truth.size(); ++k) {
    ParameterSummary s;
    s.name = names[static_cast<std::size_t>(k)];
    s.truth = truth[k];
    std::vector<double> values;
    std::size_t hits = 0;
    for (const auto& r : records) {
      if (!r.converged) continue;
      values.push_back(r.estimate[k]);
      if (r.covered[static_cast<std::size_t>(k)]) ++hits;
    }
    if (!values.empty()) {
      const double m = static_cast<double>(values.size());
      double sum = 0.0;
      for (double v : values) sum += v;
      s.mean = sum / m;
      s.bias = s.mean - s.truth;
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      s.sd = values.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      s.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
      s.coverage = static_cast<double>(hits) / m;
    }
    out.push_back(std::move(s));
  }
  return out;
}

CoverageReport coverage_study(const SimConfig& cfg) {
  cfg.validate();
  Eigen::VectorXd truth(cfg.beta1.size() + cfg.beta2.size() + 1);
  truth << cfg.beta1, cfg.beta2, cfg.xi;
  const double z = normal_quantile(0.5 * (1.0 + cfg.level));

  std::vector<ReplicateRecord> records(cfg.reps);
  auto run_one = [&](std::size_t r) {
    ReplicateRecord& rec = records[r];
    rec.replicate = r;
    try {
      const SimulatedData data = simulate_dataset(cfg, r);
      FitOptions opts = cfg.fit;
      opts.seed = CounterRng::stream_key(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ULL, r);
      const FitResult fit = fit_mle(data.y, cfg.y_trunc, data.spec, std::nullopt, opts);
      rec.converged = fit.converged;
      rec.message = fit.message;
      rec.estimate = fit.estimates();
      rec.se = fit.se;
    } catch (const std::exception& e) {
      rec.converged = false;
      rec.message = e.what();
      rec.estimate = Eigen::VectorXd::Constant(truth.size(), std::nan(""));
      rec.se = rec.estimate;
    }
    rec.covered.assign(static_cast<std::size_t>(truth.size()), false);
    if (rec.converged) {
      for (Eigen::Index k = 0; k < truth.size(); ++k) {
        rec.covered[static_cast<std::size_t>(k)] =
            std::abs(rec.estimate[k] - truth[k]) <= z * rec.se[k];
      }
    }
  };

  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.reps));
  if (threads <= 1) {
    for (std::size_t r = 0; r < cfg.reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < cfg.reps; r = next++) run_one(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  CoverageReport report;
  report.config = cfg;
  report.replicates = std::move(records);
  for (const auto& r : report.replicates) report.n_converged += r.converged ? 1 : 0;
  report.exclusion_rate =
      1.0 - static_cast<double>(report.n_converged) / static_cast<double>(cfg.reps);
  if (report.exclusion_rate > 0.2) {
    std::string first;
    for (const auto& r : report.replicates) {
      if (!r.converged) {
        first = "replicate " + std::to_string(r.replicate) + ": " + r.message;
        break;
      }
    }
    throw NumericError("coverage study: " + std::to_string(cfg.reps - report.n_converged) + " of " +
                       std::to_string(cfg.reps) + " replicates did not converge (first failure, " +
                       first + ")");
  }
  report.parameters = summarize(cfg, report.replicates);
  return report;
}

}  // namespace zitpo
