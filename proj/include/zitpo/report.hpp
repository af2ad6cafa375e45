#pragma once

// Machine-readable reports. JSON objects use sorted keys and full-precision
// numbers so the same inputs always produce the same bytes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zitpo/data_io.hpp"
#include "zitpo/diagnostics.hpp"
#include "zitpo/estimation.hpp"
#include "zitpo/simulation.hpp"

namespace zitpo {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// "***" p < 0.001, "**" < 0.01, "*" < 0.05, "." < 0.1, "" otherwise.
std::string significance_code(double p);

struct FactorOption {
  FactorDecl decl;
  ContrastSpec contrast;
};

/// Everything needed to rebuild a fitted model from its report.
struct ModelDescription {
  std::string data_path;
  std::string response;
  double y_trunc = 0.0;
  std::string pi_formula;
  std::string mu_formula;
  std::vector<FactorOption> factors;
  std::optional<double> fixed_xi;
};

nlohmann::json fit_report(const ModelDescription& model, const Dataset& ds, const FitResult& fit,
                          std::optional<std::uint64_t> seed);

/// Reads the model description and coefficients back from a fit report.
ModelDescription model_from_report(const nlohmann::json& report);
CoefVector coefficients_from_json(const nlohmann::json& doc);

nlohmann::json coverage_json(const CoverageReport& report);

/// CSV rows: replicate,parameter,estimate,se,covered
std::string replicate_csv(const CoverageReport& report);

/// CSV with columns row_id (1-based data row),residual,empirical_q,theoretical_q,log_empirical_q,log_theoretical_q
std::string qq_csv(const std::vector<QQRow>& rows);

/// Shortest round-trip decimal form of a double.
std::string format_number(double v);

}  // namespace zitpo
