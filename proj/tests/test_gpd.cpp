#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>
#include <vector>

#include "oracles.hpp"
#include "zitpo/error.hpp"
#include "zitpo/gpd.hpp"
#include "zitpo/rng.hpp"
#include "zitpo/simulation.hpp"

using namespace zitpo;

TEST_SUITE("gpd") {

TEST_CASE("cdf at the lower endpoint is zero") {
  CHECK(gpd_cdf(0.0, GpdScale{50.0, 0.25, 0.0}) == 0.0);
  CHECK(gpd_cdf(3.0, GpdScale{2.0, -0.4, 3.0}) == 0.0);
}

TEST_CASE("exponential branch at y = tau") {
  for (double tau : {0.1, 1.0, 7.5, 250.0}) {
    CHECK(gpd_cdf(tau, GpdScale{tau, 0.0, 0.0}) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  }
  CHECK(gpd_cdf(1.0, GpdScale{1.0, 0.0, 0.0}) == doctest::Approx(0.632121).epsilon(1e-6));
}

TEST_CASE("cdf at the mean for tau = 75, xi = 0.25 matches Monte-Carlo") {
  const GpdScale p{75.0, 0.25, 0.0};
  const double exact = 1.0 - std::pow(0.75, 4.0);
  CHECK(exact == 0.68359375);
  CHECK(gpd_cdf(100.0, p) == doctest::Approx(exact).epsilon(1e-14));

  // 10^6 draws through the library's inverse-CDF sampler and counter RNG.
  CounterRng rng(CounterRng::stream_key(11, 0));
  const int n = 1'000'000;
  int below = 0;
  for (int i = 0; i < n; ++i) {
    if (rtrunc_gpd(rng.uniform_open_closed(), 100.0, 0.25, 0.0) <= 100.0) ++below;
  }
  const double freq = static_cast<double>(below) / n;
  // Three binomial standard deviations is 1.4e-3.
  CHECK(std::abs(freq - exact) < 1.5e-3);
}

TEST_CASE("density at the origin is 1 / tau") {
  CHECK(gpd_pdf(0.0, GpdScale{4.0, 0.3, 0.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(gpd_pdf(2.0, GpdScale{4.0, -0.3, 2.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(gpd_pdf(0.0, GpdScale{4.0, 0.0, 0.0}) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("density integrates to one over the support") {
  for (double xi : {-0.4, -1e-12, 0.0, 1e-12, 0.25, 0.5, 0.9}) {
    CAPTURE(xi);
    const GpdScale p{2.5, xi, 0.0};
    const double upper = xi < -1e-8 ? -p.tau / xi : INFINITY;
    const double total = oracle::integrate([&](double y) { return gpd_pdf(y, p); }, 0.0, upper);
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
}

TEST_CASE("density is the derivative of the cdf") {
  const GpdScale p{0.1875, 0.25, 0.0};
  const double fd = oracle::central_difference([&](double y) { return gpd_cdf(y, p); }, 0.25);
  CHECK(std::abs(gpd_pdf(0.25, p) - fd) < 1e-6);
  CHECK(gpd_pdf(0.25, p) == doctest::Approx(std::pow(4.0 / 3.0, -5.0) / 0.1875).epsilon(1e-14));

  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> xi_d(-0.45, 0.9), tau_d(0.2, 20.0), q_d(0.01, 0.95);
  for (int k = 0; k < 50; ++k) {
    const GpdScale s{tau_d(gen), xi_d(gen), 0.0};
    const double y = gpd_quantile(q_d(gen), s);
    const double h = 1e-6 * std::max(1.0, y);
    const double slope = oracle::central_difference([&](double t) { return gpd_cdf(t, s); }, y, h);
    CHECK(gpd_pdf(y, s) == doctest::Approx(slope).epsilon(1e-6));
  }
}

TEST_CASE("cdf agrees with the closed form") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> xi_d(-0.45, 0.9), tau_d(0.2, 20.0), q_d(0.0, 0.99);
  for (int k = 0; k < 200; ++k) {
    const double tau = tau_d(gen);
    const double xi = xi_d(gen);
    const double y = oracle::plain_gpd_draw(q_d(gen), tau, xi);
    CHECK(gpd_cdf(y, GpdScale{tau, xi, 0.0}) ==
          doctest::Approx(oracle::plain_gpd_cdf(y, tau, xi)).epsilon(1e-12));
    CHECK(gpd_pdf(y, GpdScale{tau, xi, 0.0}) ==
          doctest::Approx(oracle::plain_gpd_pdf(y, tau, xi)).epsilon(1e-12));
  }
}

TEST_CASE("quantile") {
  SUBCASE("q = 0 is the location") {
    CHECK(gpd_quantile(0.0, GpdScale{3.0, 0.4, 1.5}) == 1.5);
    CHECK(gpd_quantile(0.0, GpdScale{3.0, -0.4, 0.0}) == 0.0);
  }
  SUBCASE("round trip through the cdf") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> xi_d(-0.8, 0.95), tau_d(0.01, 100.0),
        alpha_d(0.0, 10.0), q_d(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const GpdScale p{tau_d(gen), xi_d(gen), alpha_d(gen)};
      const double q = q_d(gen);
      CHECK(gpd_cdf(gpd_quantile(q, p), p) == doctest::Approx(q).epsilon(1e-10));
      const double y = gpd_quantile(q, p);
      CHECK(gpd_quantile(gpd_cdf(y, p), p) == doctest::Approx(y).epsilon(1e-9));
    }
  }
  SUBCASE("lower quartile of the mean-0.25 law by bisection") {
    const GpdScale p = to_scale(GpdMean{0.25, 0.25});
    CHECK(p.tau == 0.1875);
    const double root =
        oracle::bisect([](double y) { return oracle::plain_gpd_cdf(y, 0.1875, 0.25); }, 0.25, 0.0, 1.0);
    CHECK(gpd_quantile(0.25, p) == doctest::Approx(root).epsilon(1e-12));
    // The quoted 0.0559276 is a rounded figure; the root is 0.05592745.
    CHECK(std::abs(gpd_quantile(0.25, p) - 0.0559276) < 5e-7);
  }
  SUBCASE("outside [0, 1) is a domain error") {
    const GpdScale p{1.0, 0.2, 0.0};
    CHECK_THROWS_AS(gpd_quantile(1.0, p), DomainError);
    CHECK_THROWS_AS(gpd_quantile(-1e-12, p), DomainError);
    CHECK_THROWS_AS(gpd_quantile(NAN, p), DomainError);
  }
}

TEST_CASE("mean quantile level") {
  CHECK(mean_quantile_level(0.25) == doctest::Approx(0.68359375).epsilon(1e-15));
  for (double mu : {0.3, 59.0, 1234.5}) {
    CHECK(gpd_cdf(mu, to_scale(GpdMean{mu, 0.25})) == doctest::Approx(0.68359375).epsilon(1e-14));
  }
  CHECK(mean_quantile_level(0.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(mean_quantile_level(1e-7) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
  CHECK(mean_quantile_level(-1e-7) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
  CHECK_THROWS_AS(mean_quantile_level(1.0), DomainError);
  CHECK_THROWS_AS(mean_quantile_level(1.5), DomainError);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> mu_d(0.01, 500.0), xi_d(-2.0, 0.99);
  for (int k = 0; k < 200; ++k) {
    const double mu = mu_d(gen);
    const double xi = xi_d(gen);
    CHECK(std::abs(gpd_cdf(mu, to_scale(GpdMean{mu, xi})) - mean_quantile_level(xi)) < 1e-12);
  }
}

TEST_CASE("excess over a threshold") {
  SUBCASE("zero threshold keeps the parameters") {
    const GpdScale p{3.0, 0.3, 0.0};
    const GpdScale e = excess_distribution(p, 0.0);
    CHECK(e.tau == p.tau);
    CHECK(e.xi == p.xi);
    CHECK(e.alpha == 0.0);
  }
  SUBCASE("scale grows by xi times the threshold") {
    const GpdScale p = to_scale(GpdMean{59.0, 0.082});
    CHECK(p.tau == doctest::Approx(54.162).epsilon(1e-12));
    const GpdScale e = excess_distribution(p, 10.0);
    CHECK(e.tau == doctest::Approx(54.982).epsilon(1e-12));
    CHECK(e.alpha == 10.0);
    CHECK(e.xi == 0.082);
  }
  SUBCASE("simulated excesses follow the returned law") {
    const double tau = 54.162, xi = 0.082, ybul = 10.0;
    const GpdScale e = excess_distribution(GpdScale{tau, xi, 0.0}, ybul);
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> kept;
    for (int i = 0; i < 1'000'000; ++i) {
      const double y = oracle::plain_gpd_draw(u(gen), tau, xi);
      if (y > ybul) kept.push_back(y);
    }
    const double d = oracle::ks_distance(kept, [&](double y) { return gpd_cdf(y, e); });
    CHECK(d < 0.002);
    // Subtracting xi * y_bullet instead gives a clearly different law.
    const GpdScale wrong{tau - xi * ybul, xi, ybul};
    CHECK(oracle::ks_distance(kept, [&](double y) { return gpd_cdf(y, wrong); }) > 0.01);
  }
  SUBCASE("excess stability at N = 10^5") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& [tau, xi, ybul] : {std::tuple{2.0, 0.4, 1.5}, std::tuple{1.0, -0.3, 1.2},
                                        std::tuple{5.0, 0.0, 3.0}}) {
      CAPTURE(xi);
      const GpdScale e = excess_distribution(GpdScale{tau, xi, 0.0}, ybul);
      std::vector<double> kept;
      while (kept.size() < 100'000) {
        const double y = oracle::plain_gpd_draw(u(gen), tau, xi);
        if (y > ybul) kept.push_back(y);
      }
      const double d = oracle::ks_distance(kept, [&](double y) {
        return y >= upper_endpoint(e) ? 1.0 : gpd_cdf(y, e);
      });
      CHECK(d < 3.0 / std::sqrt(100'000.0));
    }
  }
  SUBCASE("threshold outside the support") {
    CHECK_THROWS_AS(excess_distribution(GpdScale{1.0, -0.5, 0.0}, 2.0), DomainError);
    CHECK_THROWS_AS(excess_distribution(GpdScale{1.0, 0.5, 0.0}, -1.0), DomainError);
    CHECK_THROWS_AS(excess_distribution(GpdScale{1.0, 0.5, 1.0}, 2.0), DomainError);
  }
  SUBCASE("mean of the excess law equals the mean over the threshold") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> mu_d(0.1, 100.0), xi_d(-0.9, 0.9), y_d(0.0, 50.0);
    for (int k = 0; k < 100; ++k) {
      const GpdMean m{mu_d(gen), xi_d(gen)};
      const GpdScale s = to_scale(m);
      const double ybul = std::min(y_d(gen), 0.9 * upper_endpoint(s));
      const GpdScale e = excess_distribution(s, ybul);
      CHECK(e.alpha + e.tau / (1.0 - e.xi) ==
            doctest::Approx(mean_over_threshold(m, ybul)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mean over a threshold") {
  CHECK(mean_over_threshold(GpdMean{59.0, 0.082}, 0.0) == 59.0);
  CHECK(mean_over_threshold(GpdMean{59.0, 0.082}, 10.0) == doctest::Approx(69.8932).epsilon(1e-6));

  SUBCASE("Monte-Carlo conditional mean") {
    const double tau = 59.0 * (1.0 - 0.082);
    std::mt19937_64 gen(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sum = 0.0;
    long kept = 0;
    for (int i = 0; i < 1'000'000; ++i) {
      const double y = oracle::plain_gpd_draw(u(gen), tau, 0.082);
      if (y > 10.0) {
        sum += y;
        ++kept;
      }
    }
    const double mc = sum / static_cast<double>(kept);
    CHECK(std::abs(mc / mean_over_threshold(GpdMean{59.0, 0.082}, 10.0) - 1.0) < 0.005);
  }
  SUBCASE("shifting mu shifts the result by the same amount") {
    for (double c : {0.5, 3.0, 41.0}) {
      for (double ybul : {0.0, 2.0, 30.0}) {
        CHECK(mean_over_threshold(GpdMean{10.0 + c, 0.3}, ybul) -
                  mean_over_threshold(GpdMean{10.0, 0.3}, ybul) ==
              doctest::Approx(c).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("cdf is monotone with limits 0 and 1") {
  for (double xi : {-0.6, -0.1, 0.0, 0.2, 0.9}) {
    CAPTURE(xi);
    const GpdScale p{1.7, xi, 0.4};
    double last = 0.0;
    const double top = std::isinf(upper_endpoint(p)) ? 1e6 : upper_endpoint(p);
    for (int i = 0; i <= 2000; ++i) {
      const double y = p.alpha + (top - p.alpha) * std::pow(i / 2000.0, 3.0);
      const double f = gpd_cdf(y, p);
      CHECK(f >= last);
      last = f;
    }
    CHECK(gpd_cdf(p.alpha, p) == 0.0);
    if (std::isinf(upper_endpoint(p))) {
      CHECK(gpd_cdf(1e12, GpdScale{1.7, xi, 0.4}) > 1.0 - 1e-6);
    } else {
      CHECK(gpd_cdf(upper_endpoint(p), p) == 1.0);
    }
  }
}

TEST_CASE("support errors") {
  CHECK_THROWS_AS(gpd_cdf(0.5, GpdScale{1.0, 0.2, 1.0}), DomainError);
  CHECK_THROWS_AS(gpd_cdf(2.5, GpdScale{1.0, -0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(gpd_pdf(2.5, GpdScale{1.0, -0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(gpd_cdf(1.0, GpdScale{0.0, 0.2, 0.0}), DomainError);
  CHECK_THROWS_AS(gpd_cdf(1.0, GpdScale{1.0, 0.2, -1.0}), DomainError);
  CHECK_THROWS_AS(to_scale(GpdMean{1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(to_scale(GpdMean{-1.0, 0.2}), DomainError);
  CHECK_NOTHROW(gpd_cdf(2.0, GpdScale{1.0, -0.5, 0.0}));
}

TEST_CASE("exponential branch is continuous") {
  const GpdScale e{2.0, 0.0, 0.0};
  for (int i = 0; i <= 400; ++i) {
    const double y = 0.05 * i;
    for (double xi : {1e-9, -1e-9, 2e-8, -2e-8}) {
      CHECK(std::abs(gpd_cdf(y, GpdScale{2.0, xi, 0.0}) - gpd_cdf(y, e)) < 1e-6);
      CHECK(std::abs(gpd_pdf(y, GpdScale{2.0, xi, 0.0}) - gpd_pdf(y, e)) < 1e-6);
    }
  }
}

TEST_CASE("mean and scale parameterizations round trip") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> mu_d(1e-3, 1e4), xi_d(-3.0, 0.999);
  int inexact = 0;
  for (int k = 0; k < 10000; ++k) {
    const GpdMean m{mu_d(gen), xi_d(gen)};
    const GpdMean back = to_mean(to_scale(m));
    CHECK(back.xi == m.xi);
    // Two correctly rounded operations: at most one unit in the last place.
    CHECK(std::abs(back.mu - m.mu) <= std::abs(std::nextafter(m.mu, INFINITY) - m.mu));
    if (back.mu != m.mu) ++inexact;
    // The scale form itself is exactly mu (1 - xi).
    CHECK(to_scale(m).tau == m.mu * (1.0 - m.xi));
  }
  MESSAGE("mean round trips differing in the last bit: " << inexact << " of 10000");
  // Values exactly representable in both forms round trip bit for bit.
  CHECK(to_mean(to_scale(GpdMean{59.0, 0.25})).mu == 59.0);
  CHECK(to_mean(to_scale(GpdMean{0.25, 0.25})).mu == 0.25);
}

}  // TEST_SUITE
