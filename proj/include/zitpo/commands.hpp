#pragma once

// Command-line front end. Exit codes: 0 success, 1 input error,
// 2 optimization did not converge.

#include <iosfwd>
#include <string>
#include <vector>

#include "zitpo/report.hpp"

namespace zitpo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNoConvergence = 2;

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// NAME[:base=LEVEL][:coding=treatment|sum][:levels=A|B|C]
FactorOption parse_factor_option(const std::string& text);

struct StudyPreset {
  std::string name;
  std::vector<std::size_t> sizes;
  std::vector<double> shapes;
  std::size_t reps;
};

/// Known presets; throws std::invalid_argument for an unknown name.
StudyPreset find_preset(const std::string& name);

}  // namespace zitpo::cli
