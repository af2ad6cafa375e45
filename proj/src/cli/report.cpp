#include "zitpo/report.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "zitpo/error.hpp"

namespace zitpo {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json coefficient_rows(const std::vector<std::string>& names, const FitResult& fit,
                      Eigen::Index offset) {
  const Eigen::VectorXd est = fit.estimates();
  json rows = json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto k = offset + static_cast<Eigen::Index>(j);
    const double se = fit.se[k];
    json row = {{"name", names[j]}, {"estimate", est[k]}, {"se", number_or_null(se)}};
    if (fit.converged && se > 0.0) {
      const TestResult t = wald_test(est[k], se);
      row["z"] = t.statistic;
      row["p_value"] = t.p_value;
      row["signif"] = significance_code(t.p_value);
    } else {
      row["z"] = nullptr;
      row["p_value"] = nullptr;
      row["signif"] = "";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* coding_name(Coding c) { return c == Coding::Sum ? "sum" : "treatment"; }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const json& arr) {
  const auto values = arr.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

const char* kind_name(CovariateKind k) {
  switch (k) {
    case CovariateKind::Normal: return "normal";
    case CovariateKind::Poisson: return "poisson";
    case CovariateKind::Bernoulli: return "bernoulli";
    case CovariateKind::Exponential: return "exponential";
  }
  return "unknown";
}

}  // namespace

std::string significance_code(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json fit_report(const ModelDescription& model, const Dataset& ds, const FitResult& fit,
                std::optional<std::uint64_t> seed) {
  json factors = json::array();
  for (const auto& f : model.factors) {
    const Column* col = ds.find(f.decl.name);
    factors.push_back({{"name", f.decl.name},
                       {"coding", coding_name(f.contrast.kind)},
                       {"reference", f.contrast.reference},
                       {"levels", col != nullptr ? col->levels : f.decl.levels}});
  }

  json cov = json::array();
  for (Eigen::Index i = 0; i < fit.cov.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < fit.cov.cols(); ++j) row.push_back(number_or_null(fit.cov(i, j)));
    cov.push_back(std::move(row));
  }

  const Eigen::Index xi_index = fit.coef.size() - 1;
  json report = {
      {"schema_version", kSchemaVersion},
      {"tool", {{"name", "zitpo"}, {"version", kToolVersion}}},
      {"data",
       {{"path", model.data_path},
        {"response", model.response},
        {"y_trunc", model.y_trunc},
        {"n", ds.rows()},
        {"n_zero", fit.n_zero},
        {"n_pos", fit.n_pos},
        {"recode_count", ds.recode_count}}},
      {"model",
       {{"pi_formula", model.pi_formula},
        {"mu_formula", model.mu_formula},
        {"factors", factors},
        {"fixed_xi", model.fixed_xi ? json(*model.fixed_xi) : json(nullptr)}}},
      {"coefficients",
       {{"pi", coefficient_rows(fit.names1, fit, 0)},
        {"mu", coefficient_rows(fit.names2, fit, fit.coef.beta1.size())}}},
      {"xi", {{"estimate", fit.coef.xi}, {"se", number_or_null(fit.se[xi_index])}}},
      {"loglik", fit.loglik},
      {"converged", fit.converged},
      {"iterations", fit.iterations},
      {"restarts", fit.restarts},
      {"message", fit.message},
      {"covariance", {{"names", fit.parameter_names()}, {"matrix", cov}}},
      {"seed", seed ? json(*seed) : json(nullptr)},
  };
  if (!fit.trace.empty()) {
    json trace = json::array();
    for (const auto& t : fit.trace) {
      trace.push_back({{"iteration", t.iteration}, {"loglik", t.value}, {"grad_norm", t.grad_norm}});
    }
    report["trace"] = std::move(trace);
  }
  return report;
}

ModelDescription model_from_report(const json& report) {
  try {
    if (report.at("schema_version").get<int>() != kSchemaVersion) {
      throw DataError("unsupported report schema_version");
    }
    ModelDescription m;
    const json& data = report.at("data");
    m.data_path = data.at("path").get<std::string>();
    m.response = data.at("response").get<std::string>();
    m.y_trunc = data.at("y_trunc").get<double>();
    const json& model = report.at("model");
    m.pi_formula = model.at("pi_formula").get<std::string>();
    m.mu_formula = model.at("mu_formula").get<std::string>();
    if (!model.at("fixed_xi").is_null()) m.fixed_xi = model.at("fixed_xi").get<double>();
    for (const auto& f : model.at("factors")) {
      FactorOption opt;
      opt.decl.name = f.at("name").get<std::string>();
      opt.decl.levels = f.at("levels").get<std::vector<std::string>>();
      opt.contrast.variable = opt.decl.name;
      opt.contrast.kind = f.at("coding").get<std::string>() == "sum" ? Coding::Sum : Coding::Treatment;
      opt.contrast.reference = f.at("reference").get<std::string>();
      m.factors.push_back(std::move(opt));
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed fit report: ") + e.what());
  }
}

CoefVector coefficients_from_json(const json& doc) {
  try {
    CoefVector c;
    if (doc.contains("coefficients")) {
      auto estimates = [](const json& rows) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t j = 0; j < rows.size(); ++j) {
          v[static_cast<Eigen::Index>(j)] = rows[j].at("estimate").get<double>();
        }
        return v;
      };
      c.beta1 = estimates(doc.at("coefficients").at("pi"));
      c.beta2 = estimates(doc.at("coefficients").at("mu"));
      c.xi = doc.at("xi").at("estimate").get<double>();
    } else {
      c.beta1 = to_eigen(doc.at("beta1"));
      c.beta2 = to_eigen(doc.at("beta2"));
      c.xi = doc.at("xi").get<double>();
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed coefficient document: ") + e.what());
  }
}

json coverage_json(const CoverageReport& report) {
  const SimConfig& cfg = report.config;
  json recipe = json::array();
  for (const auto& c : cfg.recipe) {
    recipe.push_back({{"name", c.name},
                      {"kind", kind_name(c.kind)},
                      {"a", c.a},
                      {"b", c.b},
                      {"standardize", c.standardize}});
  }
  json params = json::array();
  for (const auto& p : report.parameters) {
    params.push_back({{"name", p.name},
                      {"truth", p.truth},
                      {"mean", p.mean},
                      {"bias", p.bias},
                      {"sd", p.sd},
                      {"median", p.median},
                      {"coverage", p.coverage}});
  }
  std::vector<bool> converged;
  for (const auto& r : report.replicates) converged.push_back(r.converged);
  return {
      {"config",
       {{"n", cfg.n},
        {"reps", cfg.reps},
        {"xi", cfg.xi},
        {"y_trunc", cfg.y_trunc},
        {"seed", cfg.seed},
        {"level", cfg.level},
        {"beta1", to_std(cfg.beta1)},
        {"beta2", to_std(cfg.beta2)},
        {"recipe", recipe}}},
      {"parameters", params},
      {"n_converged", report.n_converged},
      {"exclusion_rate", report.exclusion_rate},
      {"converged", converged},
  };
}

std::string replicate_csv(const CoverageReport& report) {
  const auto& params = report.parameters;
  std::ostringstream out;
  out << "replicate,parameter,estimate,se,covered\n";
  for (const auto& r : report.replicates) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      out << r.replicate << ',' << params[k].name << ',' << format_number(r.estimate[i]) << ','
          << format_number(r.se[i]) << ',' << (r.covered[k] ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

std::string qq_csv(const std::vector<QQRow>& rows) {
  std::ostringstream out;
  out << "row_id,residual,empirical_q,theoretical_q,log_empirical_q,log_theoretical_q\n";
  for (const auto& r : rows) {
    out << r.row_id + 1 << ',' << format_number(r.residual) << ',' << format_number(r.empirical_q) << ','
        << format_number(r.theoretical_q) << ',' << format_number(r.log_empirical_q) << ','
        << format_number(r.log_theoretical_q) << '\n';
  }
  return out.str();
}

}  // namespace zitpo
