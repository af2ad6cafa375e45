#pragma once

// Shared helpers for tests that drive the command-line front end.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "zitpo/commands.hpp"
#include "zitpo/rng.hpp"
#include "zitpo/simulation.hpp"

namespace fixture {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = zitpo::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

/// Coefficients of a synthetic listening-time data set. Rows carry a numeric
/// x on (-1, 1), a 3-level factor a and a 4-level factor b; only x enters the
/// linear predictors.
struct Synthetic {
  std::size_t n = 1000;
  double pi0 = 0.0;
  double pi_x = 0.0;
  double mu0 = 1.0;
  double mu_x = 0.0;
  double xi = 0.2;
  std::uint64_t seed = 1;
};

/// Latent responses are written unrecorded; the loader applies the threshold.
inline std::string synthetic_csv(const Synthetic& s) {
  zitpo::CounterRng rng(zitpo::CounterRng::stream_key(s.seed, 0x5eed));
  std::ostringstream out;
  out.precision(17);
  out << "minutes,x,a,b\n";
  for (std::size_t i = 0; i < s.n; ++i) {
    const double x = 2.0 * rng.uniform_open_closed() - 1.0;
    const int a = static_cast<int>(rng() % 3);
    const int b = static_cast<int>(rng() % 4);
    const double pi = 1.0 / (1.0 + std::exp(-(s.pi0 + s.pi_x * x)));
    const double mu = std::exp(s.mu0 + s.mu_x * x);
    const double v = rng.uniform_open_closed();
    const double u = rng.uniform_open_closed();
    const double y = v <= pi ? zitpo::rtrunc_gpd(u, mu, s.xi, 0.0) : 0.0;
    out << y << ',' << x << ",a" << a << ",b" << b << '\n';
  }
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace fixture
