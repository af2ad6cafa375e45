#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "zitpo/error.hpp"
#include "zitpo/gpd.hpp"
#include "zitpo/probability.hpp"
#include "zitpo/rng.hpp"
#include "zitpo/simulation.hpp"

using namespace zitpo;

namespace {

double truncated_cdf(double y, double mu, double xi, double y0) {
  const double tau = mu * (1.0 - xi);
  const double f0 = oracle::plain_gpd_cdf(y0, tau, xi);
  return (oracle::plain_gpd_cdf(y, tau, xi) - f0) / (1.0 - f0);
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("counter generator") {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
  }
  CHECK(a.counter() == 100);
  CounterRng u(CounterRng::stream_key(1, 0));
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform_open_closed();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    REQUIRE(v > 0.0);
    REQUIRE(v <= 1.0);
  }
  CHECK(lo < 1e-3);
  CHECK(hi > 1.0 - 1e-3);
  CHECK(CounterRng::stream_key(1, 0) != CounterRng::stream_key(1, 1));
  CHECK(CounterRng::stream_key(1, 0) != CounterRng::stream_key(2, 0));
}

TEST_CASE("truncated GPD draws") {
  SUBCASE("u = 1 is the threshold") {
    CHECK(rtrunc_gpd(1.0, 3.0, 0.25, 0.125) == 0.125);
    CHECK(rtrunc_gpd(1.0, 3.0, 0.0, 4.95) == 4.95);
    CHECK(rtrunc_gpd(1.0, 3.0, -0.3, 0.0) == 0.0);
  }
  SUBCASE("median of the unit-mean law") {
    const double y = rtrunc_gpd(0.5, 1.0, 0.25, 0.0);
    CHECK(y == doctest::Approx(3.0 * (std::pow(2.0, 0.25) - 1.0)).epsilon(1e-14));
    // The quoted six-digit value is within one unit of the last place.
    CHECK(std::abs(y - 0.567622) < 1e-6);
    CHECK(gpd_cdf(y, to_scale(GpdMean{1.0, 0.25})) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("exponential branch is the limit") {
    for (double u : {0.9, 0.5, 0.01}) {
      CHECK(rtrunc_gpd(u, 2.0, 0.0, 0.3) == doctest::Approx(-2.0 * std::log(u) + 0.3).epsilon(1e-14));
      CHECK(std::abs(rtrunc_gpd(u, 2.0, 1e-9, 0.3) - rtrunc_gpd(u, 2.0, 0.0, 0.3)) < 1e-6);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(rtrunc_gpd(0.0, 1.0, 0.25, 0.0), DomainError);
    CHECK_THROWS_AS(rtrunc_gpd(1.5, 1.0, 0.25, 0.0), DomainError);
    CHECK_THROWS_AS(rtrunc_gpd(0.5, 1.0, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(rtrunc_gpd(0.5, -1.0, 0.2, 0.0), DomainError);
  }
  SUBCASE("mean of 10^6 draws") {
    CounterRng rng(CounterRng::stream_key(5, 0));
    std::vector<double> draws(1'000'000);
    for (double& d : draws) d = rtrunc_gpd(rng.uniform_open_closed(), 7.0, 0.25, 0.0);
    const double m = oracle::mean(draws);
    CHECK(std::abs(m - 7.0) < 3.0 * oracle::sd(draws) / std::sqrt(1e6));
  }
  SUBCASE("distribution of 10^5 draws above a threshold") {
    for (const auto& [mu, xi, y0] : {std::tuple{1.0, 0.25, 0.125}, std::tuple{59.0, 0.082, 4.95},
                                     std::tuple{2.0, -0.3, 0.5}, std::tuple{1.0, 0.0, 0.2}}) {
      CAPTURE(xi);
      CounterRng rng(CounterRng::stream_key(17, 3));
      std::vector<double> draws(100'000);
      for (double& d : draws) d = rtrunc_gpd(rng.uniform_open_closed(), mu, xi, y0);
      const double d = oracle::ks_distance(draws, [&](double y) { return truncated_cdf(y, mu, xi, y0); });
      CHECK(d < oracle::ks_critical_1pct(draws.size()));
    }
  }
}

TEST_CASE("simulated data sets") {
  SUBCASE("zero rating coefficients give half latent zeros") {
    SimConfig cfg = reference_design(20000, 0.25, 1, 3);
    cfg.beta1.setZero();
    const SimulatedData sim = simulate_dataset(cfg, 0);
    const double frac = static_cast<double>(sim.n_latent_positive) / 20000.0;
    CHECK(std::abs(frac - 0.5) < 3.0 * std::sqrt(0.25 / 20000.0));
  }
  SUBCASE("about 30 percent positives under the reference design") {
    std::vector<double> fractions;
    for (std::size_t r = 0; r < 50; ++r) {
      const SimulatedData sim = simulate_dataset(reference_design(2000, 0.25, 50, 8), r);
      fractions.push_back(static_cast<double>((sim.y.array() > 0.0).count()) / 2000.0);
    }
    const double mean = oracle::mean(fractions);
    MESSAGE("mean positive fraction " << mean);
    CHECK(mean >= 0.25);
    CHECK(mean <= 0.35);
    CHECK(oracle::median(fractions) >= 0.25);
  }
  SUBCASE("same seed and replicate give identical data") {
    const SimConfig cfg = reference_design(500, 0.5, 3, 99);
    const SimulatedData a = simulate_dataset(cfg, 2);
    const SimulatedData b = simulate_dataset(cfg, 2);
    CHECK(a.y == b.y);
    CHECK(a.spec.x1 == b.spec.x1);
    CHECK(a.spec.x2 == b.spec.x2);
    CHECK(a.y != simulate_dataset(cfg, 1).y);
  }
  SUBCASE("truncation happens at the rate of the positive-part cdf") {
    double expected = 0.0, var = 0.0;
    std::size_t observed = 0;
    for (std::size_t r = 0; r < 50; ++r) {
      const SimConfig cfg = reference_design(2000, 0.25, 50, 21);
      const SimulatedData sim = simulate_dataset(cfg, r);
      observed += sim.n_truncated;
      for (const RowParams& row : sim.truth) {
        const double p = row.pi * gpd_cdf(cfg.y_trunc, to_scale(GpdMean{row.mu, cfg.xi}));
        expected += p;
        var += p * (1.0 - p);
      }
      for (Eigen::Index i = 0; i < sim.y.size(); ++i) {
        CHECK((sim.y[i] == 0.0 || sim.y[i] > cfg.y_trunc));
      }
    }
    CHECK(std::abs(static_cast<double>(observed) - expected) < 3.0 * std::sqrt(var));
  }
  SUBCASE("linear predictor overflow names the row") {
    SimConfig cfg = reference_design(50, 0.25, 1, 1);
    cfg.beta2[5] = 1000.0;
    CHECK_THROWS_AS(simulate_dataset(cfg, 0), DataError);
  }
  SUBCASE("configuration checks") {
    SimConfig cfg = reference_design(10, 0.25, 1, 1);
    cfg.reps = 0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = reference_design(0, 0.25, 1, 1);
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = reference_design(10, 1.0, 1, 1);
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = reference_design(10, 0.25, 1, 1);
    cfg.recipe.pop_back();
    CHECK_THROWS_AS(cfg.validate(), DimensionError);
  }
  SUBCASE("standardized covariates") {
    SimConfig cfg = reference_design(400, 0.25, 1, 6);
    for (auto& c : cfg.recipe) c.standardize = true;
    const SimulatedData sim = simulate_dataset(cfg, 0);
    for (Eigen::Index j = 1; j < sim.spec.x1.cols(); ++j) {
      const auto col = sim.spec.x1.col(j);
      CHECK(std::abs(col.mean()) < 1e-12);
      CHECK((col.array() - col.mean()).square().sum() / 399.0 == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("coverage study") {
  SUBCASE("one replicate reports its own indicators") {
    const SimConfig cfg = reference_design(600, 0.25, 1, 4);
    const CoverageReport rep = coverage_study(cfg);
    REQUIRE(rep.replicates.size() == 1);
    const ReplicateRecord& r = rep.replicates[0];
    REQUIRE(r.converged);
    REQUIRE(rep.parameters.size() == 13);
    for (std::size_t k = 0; k < 13; ++k) {
      const auto& p = rep.parameters[k];
      CHECK(p.mean == r.estimate[static_cast<Eigen::Index>(k)]);
      CHECK(p.median == p.mean);
      CHECK(p.coverage == (r.covered[k] ? 1.0 : 0.0));
      CHECK(p.bias == p.mean - p.truth);
      CHECK(p.sd == 0.0);
    }
    CHECK(rep.n_converged == 1);
    CHECK(rep.exclusion_rate == 0.0);
  }
  SUBCASE("results do not depend on the thread count") {
    SimConfig cfg = reference_design(400, 0.25, 12, 31);
    cfg.threads = 1;
    const CoverageReport one = coverage_study(cfg);
    cfg.threads = 4;
    const CoverageReport four = coverage_study(cfg);
    REQUIRE(one.replicates.size() == four.replicates.size());
    for (std::size_t r = 0; r < one.replicates.size(); ++r) {
      CHECK(one.replicates[r].estimate == four.replicates[r].estimate);
      CHECK(one.replicates[r].se == four.replicates[r].se);
      CHECK(one.replicates[r].covered == four.replicates[r].covered);
    }
    for (std::size_t k = 0; k < one.parameters.size(); ++k) {
      CHECK(one.parameters[k].mean == four.parameters[k].mean);
      CHECK(one.parameters[k].coverage == four.parameters[k].coverage);
    }
  }
  SUBCASE("coverage is a fraction and rows match the parameters") {
    const CoverageReport rep = coverage_study(reference_design(500, 0.5, 10, 2));
    CHECK(rep.parameters.size() == 13);
    for (const auto& p : rep.parameters) {
      CHECK(p.coverage >= 0.0);
      CHECK(p.coverage <= 1.0);
    }
    CHECK(rep.parameters.back().name == "xi");
    CHECK(rep.parameters[6].name == "mu:(Intercept)");
  }
  SUBCASE("too many failures abort") {
    SimConfig cfg = reference_design(300, 0.25, 5, 2);
    cfg.fit.max_iter = 1;
    CHECK_THROWS_AS(coverage_study(cfg), NumericError);
  }
}

}  // TEST_SUITE
