#include "zitpo/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "zitpo/error.hpp"
#include "zitpo/model.hpp"
#include "zitpo/probability.hpp"

namespace zitpo::cli {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) out.push_back(part);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pvalue_text(double p) {
  if (!std::isfinite(p)) return "NA";
  if (p < 1e-4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1e", p);
    return buf;
  }
  return fixed(p, 4);
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Flags shared by every command that builds a model from a data file.
struct ModelFlags {
  std::string data;
  std::string response;
  double trunc = 0.0;
  std::string pi_formula;
  std::string mu_formula;
  std::vector<std::string> factors;
  std::optional<double> fix_xi;
  std::optional<std::uint64_t> seed;
  int max_iter = BfgsOptions{}.max_iter;

  CLI::Option* data_opt = nullptr;
  CLI::Option* response_opt = nullptr;
  CLI::Option* trunc_opt = nullptr;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  f.data_opt = cmd->add_option("--data", f.data, "CSV file with a header row");
  f.response_opt = cmd->add_option("--response", f.response, "response column, in minutes");
  f.trunc_opt = cmd->add_option("--trunc", f.trunc,
                                "truncation threshold; responses in (0, trunc] become zero");
  cmd->add_option("--pi-formula", f.pi_formula,
                  "terms of the probability part, e.g. \"age,gender,age:gender\"");
  cmd->add_option("--mu-formula", f.mu_formula, "terms of the mean part");
  cmd->add_option("--factor", f.factors,
                  "categorical column: NAME[:base=LEVEL][:coding=treatment|sum][:levels=A|B]")
      ->allow_extra_args(false);
  cmd->add_option("--fix-xi", f.fix_xi, "hold the shape parameter at this value");
  cmd->add_option("--seed", f.seed, "seed for the restart perturbation");
  cmd->add_option("--max-iter", f.max_iter, "BFGS iteration limit")->check(CLI::PositiveNumber);
}

void require_model_flags(const ModelFlags& f) {
  for (const auto* opt : {f.data_opt, f.response_opt, f.trunc_opt}) {
    if (opt->count() == 0) throw CLI::RequiredError(opt->get_name());
  }
}

ModelDescription describe(const ModelFlags& f) {
  ModelDescription d;
  d.data_path = f.data;
  d.response = f.response;
  d.y_trunc = f.trunc;
  d.pi_formula = f.pi_formula;
  d.mu_formula = f.mu_formula;
  d.fixed_xi = f.fix_xi;
  for (const auto& text : f.factors) d.factors.push_back(parse_factor_option(text));
  return d;
}

FitOptions fit_options(const ModelFlags& f) {
  FitOptions opts;
  opts.fixed_xi = f.fix_xi;
  opts.max_iter = f.max_iter;
  if (f.seed) opts.seed = *f.seed;
  return opts;
}

struct LoadedModel {
  ModelDescription desc;
  Dataset ds;
  FormulaSpec pi_terms;
  FormulaSpec mu_terms;
  std::vector<ContrastSpec> contrasts;
  ModelSpec spec;
};

ModelSpec make_spec(const Dataset& ds, const FormulaSpec& pi_terms, const FormulaSpec& mu_terms,
                    const std::vector<ContrastSpec>& contrasts) {
  Design d1 = build_design(ds, pi_terms, contrasts);
  Design d2 = build_design(ds, mu_terms, contrasts);
  ModelSpec spec{std::move(d1.x), std::move(d2.x), std::move(d1.names), std::move(d2.names)};
  spec.validate();
  return spec;
}

LoadedModel load_model(const ModelDescription& desc) {
  LoadedModel m;
  m.desc = desc;
  m.pi_terms = parse_formula(desc.pi_formula);
  m.mu_terms = parse_formula(desc.mu_formula);

  std::vector<std::string> columns{desc.response};
  for (const auto& v : m.pi_terms.variables()) columns.push_back(v);
  for (const auto& v : m.mu_terms.variables()) {
    if (std::find(columns.begin(), columns.end(), v) == columns.end()) columns.push_back(v);
  }
  std::vector<FactorDecl> decls;
  for (const auto& f : desc.factors) {
    decls.push_back(f.decl);
    m.contrasts.push_back(f.contrast);
  }
  m.ds = read_csv(desc.data_path, desc.response, desc.y_trunc, decls, columns);
  m.spec = make_spec(m.ds, m.pi_terms, m.mu_terms, m.contrasts);
  return m;
}

void print_fit_table(std::ostream& out, const FitResult& fit, const Dataset& ds) {
  out << "ZITPo fit: n=" << ds.rows() << "  zeros=" << fit.n_zero << "  positives=" << fit.n_pos
      << "  recoded to zero=" << ds.recode_count << "  y0=" << format_number(fit.y_trunc)
      << '\n';
  const auto print_part = [&](const char* title, const Eigen::VectorXd& est,
                              const Eigen::VectorXd& se, const std::vector<std::string>& names,
                              std::size_t offset) {
    out << '\n' << title << '\n';
    out << pad("", 24) << lpad("estimate", 11) << lpad("se", 10) << lpad("z", 9)
        << lpad("p", 10) << '\n';
    for (Eigen::Index j = 0; j < est.size(); ++j) {
      const double s = se[offset + static_cast<std::size_t>(j)];
      out << pad(names[static_cast<std::size_t>(j)], 24) << lpad(fixed(est[j], 3), 11);
      if (!(std::isfinite(s) && s > 0.0)) {
        out << lpad("NA", 10) << lpad("NA", 9) << lpad("NA", 10) << '\n';
        continue;
      }
      const auto t = wald_test(est[j], s);
      out << lpad(fixed(s, 3), 10) << lpad(fixed(t.statistic, 2), 9)
          << lpad(pvalue_text(t.p_value), 10) << ' ' << significance_code(t.p_value) << '\n';
    }
  };
  const auto p1 = static_cast<std::size_t>(fit.coef.beta1.size());
  const auto p2 = static_cast<std::size_t>(fit.coef.beta2.size());
  print_part("Probability of listening (logit link)", fit.coef.beta1, fit.se, fit.names1, 0);
  print_part("Average listening time (log link)", fit.coef.beta2, fit.se, fit.names2, p1);
  out << '\n'
      << "xi = " << fixed(fit.coef.xi, 3)
      << (fit.xi_fixed ? "  (held fixed)" : "  (se " + fixed(fit.se[p1 + p2], 3) + ")") << '\n';
  out << "log-likelihood = " << fixed(fit.loglik, 3) << "  iterations = " << fit.iterations
      << "  restarts = " << fit.restarts << '\n';
  out << (fit.converged ? "converged" : "NOT converged: " + fit.message) << '\n';
  out << "Signif. codes: 0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1\n";
}

// ---------------------------------------------------------------- fit

struct FitFlags {
  ModelFlags model;
  std::string out_path;
  std::string init_path;
  bool trace = false;
};

int cmd_fit(const FitFlags& f, std::ostream& out, std::ostream& err) {
  require_model_flags(f.model);
  const LoadedModel m = load_model(describe(f.model));
  FitOptions opts = fit_options(f.model);
  opts.trace = f.trace;

  std::optional<CoefVector> init;
  if (!f.init_path.empty()) {
    init = coefficients_from_json(read_json_file(f.init_path));
    if (init->beta1.size() != m.spec.x1.cols() || init->beta2.size() != m.spec.x2.cols()) {
      throw DimensionError("--init coefficients have " + std::to_string(init->beta1.size()) +
                           " + " + std::to_string(init->beta2.size()) +
                           " entries but the model needs " + std::to_string(m.spec.x1.cols()) +
                           " + " + std::to_string(m.spec.x2.cols()));
    }
  }

  const FitResult fit = fit_mle(m.ds.y, m.desc.y_trunc, m.spec, init, opts);
  const json report = fit_report(m.desc, m.ds, fit, f.model.seed);
  write_file(f.out_path, report.dump(2) + "\n");
  print_fit_table(out, fit, m.ds);
  if (!fit.converged) {
    err << "zitpo fit: optimization did not converge (" << fit.message << "); report written to "
        << f.out_path << '\n';
    return kExitNoConvergence;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- lrt

struct LrtFlags {
  ModelFlags model;
  std::string drop;
  std::string out_path;
};

struct LrtRow {
  std::string term;
  std::string part;
  FitResult reduced;
};

int cmd_lrt(const LrtFlags& f, std::ostream& out, std::ostream& err) {
  require_model_flags(f.model);
  const LoadedModel m = load_model(describe(f.model));
  const FitOptions opts = fit_options(f.model);

  std::vector<std::string> drops;
  for (const auto& piece : split(f.drop, ',')) {
    const std::string t = trim(piece);
    if (!t.empty()) drops.push_back(t);
  }

  // Validate every requested drop before spending time on fits.
  struct Plan {
    std::string term;
    std::string part;
    ModelSpec spec;
  };
  std::vector<Plan> plans;
  for (const auto& term : drops) {
    bool matched = false;
    for (int part = 0; part < 2; ++part) {
      const FormulaSpec& base = part == 0 ? m.pi_terms : m.mu_terms;
      FormulaSpec reduced;
      try {
        reduced = drop_term(base, term);
      } catch (const FormulaError&) {
        throw;
      } catch (const std::invalid_argument&) {
        continue;
      }
      matched = true;
      ModelSpec spec = part == 0 ? make_spec(m.ds, reduced, m.mu_terms, m.contrasts)
                                 : make_spec(m.ds, m.pi_terms, reduced, m.contrasts);
      plans.push_back({term, part == 0 ? "pi" : "mu", std::move(spec)});
    }
    if (!matched) throw std::invalid_argument("term '" + term + "' is not in either model part");
  }

  FitResult full = fit_mle(m.ds.y, m.desc.y_trunc, m.spec, std::nullopt, opts);
  if (!full.converged) {
    err << "zitpo lrt: full model did not converge (" << full.message << ")\n";
    return kExitNoConvergence;
  }

  std::vector<LrtRow> rows;
  for (const auto& p : plans) {
    FitResult reduced = fit_mle(m.ds.y, m.desc.y_trunc, p.spec, std::nullopt, opts);
    if (!reduced.converged) {
      err << "zitpo lrt: reduced model without '" << p.term << "' (" << p.part
          << " part) did not converge (" << reduced.message << ")\n";
      return kExitNoConvergence;
    }
    // The reduced model is nested in the full one, so a higher reduced
    // likelihood means the full fit stopped early. Restart it from the
    // embedded reduced solution, which can only go up from there.
    if (reduced.loglik > full.loglik) {
      FitResult again =
          fit_mle(m.ds.y, m.desc.y_trunc, m.spec, embed_coefficients(reduced, m.spec), opts);
      if (again.converged && again.loglik > full.loglik) full = std::move(again);
    }
    rows.push_back({p.term, p.part, std::move(reduced)});
  }

  json tests = json::array();
  out << pad("term", 24) << pad("part", 6) << lpad("LRT", 10) << lpad("df", 5) << lpad("p", 10)
      << '\n';
  for (const auto& r : rows) {
    const TestResult t = lrt(full, r.reduced);
    out << pad(r.term, 24) << pad(r.part, 6) << lpad(fixed(t.statistic, 2), 10)
        << lpad(std::to_string(t.df), 5) << lpad(pvalue_text(t.p_value), 10) << ' '
        << significance_code(t.p_value) << '\n';
    tests.push_back({{"term", r.term},
                     {"part", r.part},
                     {"statistic", t.statistic},
                     {"df", t.df},
                     {"p_value", t.p_value},
                     {"signif", significance_code(t.p_value)},
                     {"reduced_loglik", r.reduced.loglik}});
  }
  out << "full model log-likelihood = " << fixed(full.loglik, 3) << '\n';

  if (!f.out_path.empty()) {
    const json doc = {{"schema_version", kSchemaVersion},
                      {"tool", {{"name", "zitpo"}, {"version", kToolVersion}}},
                      {"full_loglik", full.loglik},
                      {"tests", tests}};
    write_file(f.out_path, doc.dump(2) + "\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseFlags {
  ModelFlags model;
  std::string report_path;
  std::string out_path;
  std::size_t groups = 10;
};

int cmd_diagnose(const DiagnoseFlags& f, std::ostream& out, std::ostream& err) {
  LoadedModel m;
  FitResult fit;
  if (!f.report_path.empty()) {
    const json report = read_json_file(f.report_path);
    m = load_model(model_from_report(report));
    fit.coef = coefficients_from_json(report);
    fit.converged = report.value("converged", false);
    if (fit.coef.beta1.size() != m.spec.x1.cols() || fit.coef.beta2.size() != m.spec.x2.cols()) {
      throw DimensionError("report coefficients do not match the rebuilt design");
    }
    if (!fit.converged) {
      err << "zitpo diagnose: the report describes a fit that did not converge\n";
      return kExitNoConvergence;
    }
  } else {
    require_model_flags(f.model);
    m = load_model(describe(f.model));
    fit = fit_mle(m.ds.y, m.desc.y_trunc, m.spec, std::nullopt, fit_options(f.model));
    if (!fit.converged) {
      err << "zitpo diagnose: optimization did not converge (" << fit.message << ")\n";
      return kExitNoConvergence;
    }
  }

  const ResidualSet rs = residuals(m.ds.y, m.desc.y_trunc, fit, m.spec);
  if (rs.size() == 0) throw DataError("no positive observations above the threshold to diagnose");
  write_file(f.out_path, qq_csv(qq_data(rs)));

  out << "Pareto residuals: n=" << rs.size() << "  xi_hat=" << fixed(rs.xi_hat, 4) << '\n';
  const double ks = ks_statistic(rs);
  out << "KS statistic vs GPD(1, xi_hat): " << fixed(ks, 4)
      << "  (nominal p " << pvalue_text(ks_pvalue(ks, rs.size()))
      << ", optimistic because xi is estimated)\n";
  if (rs.size() >= 2) {
    out << "QQ correlation: " << fixed(qq_correlation(rs), 4) << '\n';
  } else {
    out << "QQ correlation: NA (one residual)\n";
  }

  const auto bins = zero_calibration(m.ds.y, m.desc.y_trunc, fit, m.spec, f.groups);
  out << "\nZero-mass calibration by predicted P(Y = 0)\n";
  out << lpad("group", 6) << lpad("n", 8) << lpad("predicted", 12) << lpad("observed", 12)
      << '\n';
  for (std::size_t g = 0; g < bins.size(); ++g) {
    out << lpad(std::to_string(g + 1), 6) << lpad(std::to_string(bins[g].count), 8)
        << lpad(fixed(bins[g].predicted_zero, 4), 12) << lpad(fixed(bins[g].observed_zero, 4), 12) << '\n';
  }
  out << "QQ data written to " << f.out_path << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- simulate / coverage

struct SimFlags {
  std::string preset;
  std::optional<std::size_t> n;
  std::optional<double> xi;
  std::optional<double> trunc;
  std::optional<std::size_t> reps;
  std::uint64_t seed = 1;
  std::size_t rep = 0;
  std::size_t threads = 0;
  double level = 0.95;
  std::string out_path;
  std::string csv_path;
};

std::vector<SimConfig> study_grid(const SimFlags& f, std::size_t default_reps) {
  std::vector<std::size_t> sizes{1000};
  std::vector<double> shapes{0.25};
  std::size_t reps = default_reps;
  if (!f.preset.empty()) {
    const StudyPreset p = find_preset(f.preset);
    sizes = p.sizes;
    shapes = p.shapes;
    reps = p.reps;
  }
  if (f.n) sizes = {*f.n};
  if (f.xi) shapes = {*f.xi};
  if (f.reps) reps = *f.reps;
  if (reps == 0) throw std::invalid_argument("--reps must be at least 1");

  std::vector<SimConfig> out;
  for (const std::size_t n : sizes) {
    for (const double xi : shapes) {
      SimConfig cfg = reference_design(n, xi, reps, f.seed);
      if (f.trunc) cfg.y_trunc = *f.trunc;
      cfg.level = f.level;
      cfg.threads = f.threads;
      cfg.validate();
      out.push_back(std::move(cfg));
    }
  }
  return out;
}

int cmd_simulate(const SimFlags& f, std::ostream& out) {
  const SimConfig cfg = study_grid(f, 1).front();
  const SimulatedData sim = simulate_dataset(cfg, f.rep);
  std::string csv = "y";
  for (const auto& name : sim.spec.names1) {
    if (name != "(Intercept)") csv += "," + name;
  }
  csv += '\n';
  for (Eigen::Index i = 0; i < sim.y.size(); ++i) {
    csv += format_number(sim.y[i]);
    for (Eigen::Index j = 0; j < sim.spec.x1.cols(); ++j) {
      if (sim.spec.names1[static_cast<std::size_t>(j)] == "(Intercept)") continue;
      csv += "," + format_number(sim.spec.x1(i, j));
    }
    csv += '\n';
  }
  write_file(f.out_path, csv);
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < sim.y.size(); ++i) zeros += sim.y[i] == 0.0 ? 1 : 0;
  out << "simulated n=" << sim.y.size() << " (zeros=" << zeros
      << ", truncated latent positives=" << sim.n_truncated << ") xi=" << format_number(cfg.xi)
      << " y0=" << format_number(cfg.y_trunc) << " seed=" << f.seed << " replicate=" << f.rep
      << '\n';
  return kExitOk;
}

std::string indexed_path(const std::string& path, std::size_t k) {
  const std::filesystem::path p(path);
  std::filesystem::path q = p.parent_path() / p.stem();
  q += "_" + std::to_string(k + 1) + p.extension().string();
  return q.string();
}

int cmd_coverage(const SimFlags& f, std::ostream& out) {
  const std::vector<SimConfig> grid = study_grid(f, 100);
  json studies = json::array();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const SimConfig& cfg = grid[k];
    const CoverageReport rep = coverage_study(cfg);
    studies.push_back(coverage_json(rep));
    if (!f.csv_path.empty()) {
      write_file(grid.size() == 1 ? f.csv_path : indexed_path(f.csv_path, k), replicate_csv(rep));
    }
    out << "study n=" << cfg.n << " xi=" << format_number(cfg.xi) << " reps=" << cfg.reps
        << " converged=" << rep.n_converged << " excluded=" << fixed(rep.exclusion_rate, 3)
        << '\n';
    out << "  " << pad("parameter", 22) << lpad("truth", 9) << lpad("mean", 9) << lpad("sd", 9)
        << lpad("median", 9) << lpad("coverage", 10) << '\n';
    for (const auto& p : rep.parameters) {
      out << "  " << pad(p.name, 22) << lpad(fixed(p.truth, 3), 9) << lpad(fixed(p.mean, 3), 9)
          << lpad(fixed(p.sd, 3), 9) << lpad(fixed(p.median, 3), 9)
          << lpad(fixed(p.coverage, 3), 10) << '\n';
    }
  }
  json doc = {{"schema_version", kSchemaVersion},
              {"tool", {{"name", "zitpo"}, {"version", kToolVersion}}},
              {"preset", f.preset.empty() ? json(nullptr) : json(find_preset(f.preset).name)},
              {"seed", f.seed},
              {"studies", studies}};
  write_file(f.out_path, doc.dump(2) + "\n");
  return kExitOk;
}

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
  cmd->add_option("--preset", f.preset, "named study design (reference-design)");
  cmd->add_option("--n", f.n, "sample size")->check(CLI::PositiveNumber);
  cmd->add_option("--xi", f.xi, "true shape parameter");
  cmd->add_option("--trunc", f.trunc, "truncation threshold")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out_path, "output file")->required();
}

}  // namespace

FactorOption parse_factor_option(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.empty() || trim(parts[0]).empty()) {
    throw std::invalid_argument("--factor needs a column name, got '" + text + "'");
  }
  FactorOption opt;
  opt.decl.name = trim(parts[0]);
  opt.contrast.variable = opt.decl.name;
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--factor option '" + parts[i] + "' is not KEY=VALUE");
    }
    const std::string key = trim(parts[i].substr(0, eq));
    const std::string value = trim(parts[i].substr(eq + 1));
    if (key == "base") {
      opt.contrast.reference = value;
    } else if (key == "coding") {
      if (value == "treatment") {
        opt.contrast.kind = Coding::Treatment;
      } else if (value == "sum") {
        opt.contrast.kind = Coding::Sum;
      } else {
        throw std::invalid_argument("unknown coding '" + value + "' (treatment or sum)");
      }
    } else if (key == "levels") {
      for (const auto& level : split(value, '|')) {
        const std::string l = trim(level);
        if (l.empty()) throw std::invalid_argument("empty level in '" + text + "'");
        if (std::find(opt.decl.levels.begin(), opt.decl.levels.end(), l) !=
            opt.decl.levels.end()) {
          throw std::invalid_argument("level '" + l + "' listed twice in '" + text + "'");
        }
        opt.decl.levels.push_back(l);
      }
    } else {
      throw std::invalid_argument("unknown --factor key '" + key + "'");
    }
  }
  if (!opt.contrast.reference.empty() && !opt.decl.levels.empty() &&
      std::find(opt.decl.levels.begin(), opt.decl.levels.end(), opt.contrast.reference) ==
          opt.decl.levels.end()) {
    throw std::invalid_argument("base level '" + opt.contrast.reference +
                                "' is not among the declared levels");
  }
  return opt;
}

StudyPreset find_preset(const std::string& name) {
  if (name == "reference-design" || name == "paper-\xC2\xA7" "3") {
    return {"reference-design", {500, 1000, 2000}, {0.25, 0.5}, 2500};
  }
  throw std::invalid_argument("unknown preset '" + name + "' (available: reference-design)");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-inflated truncated Pareto regression for listening times", "zitpo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit the model and write a JSON report");
  add_model_flags(fit_cmd, fit.model);
  fit_cmd->add_option("--out", fit.out_path, "JSON report path")->required();
  fit_cmd->add_option("--init", fit.init_path, "starting coefficients (report or beta JSON)");
  fit_cmd->add_flag("--trace", fit.trace, "record the optimizer trace in the report");

  LrtFlags lrt_flags;
  auto* lrt_cmd = app.add_subcommand("lrt", "likelihood-ratio tests for dropping terms");
  add_model_flags(lrt_cmd, lrt_flags.model);
  lrt_cmd->add_option("--drop", lrt_flags.drop, "comma-separated terms to drop from each part");
  lrt_cmd->add_option("--out", lrt_flags.out_path, "optional JSON output");

  DiagnoseFlags diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Pareto residuals, QQ data and calibration");
  add_model_flags(diag_cmd, diag.model);
  diag_cmd->add_option("--report", diag.report_path, "fit report to reuse instead of refitting");
  diag_cmd->add_option("--out", diag.out_path, "QQ CSV path")->required();
  diag_cmd->add_option("--groups", diag.groups, "calibration groups")
      ->check(CLI::PositiveNumber);

  SimFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "write one simulated data set as CSV");
  add_sim_flags(sim_cmd, sim);
  sim_cmd->add_option("--rep", sim.rep, "replicate index within the seed's stream family");

  SimFlags cov;
  auto* cov_cmd = app.add_subcommand("coverage", "Monte-Carlo coverage study");
  add_sim_flags(cov_cmd, cov);
  cov_cmd->add_option("--reps", cov.reps, "replicates per design cell");
  cov_cmd->add_option("--threads", cov.threads, "worker threads (0 = hardware concurrency)");
  cov_cmd->add_option("--level", cov.level, "confidence level")->check(CLI::Range(0.5, 0.9999));
  cov_cmd->add_option("--csv", cov.csv_path, "per-replicate CSV output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "zitpo: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitInput;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out, err);
    if (*lrt_cmd) return cmd_lrt(lrt_flags, out, err);
    if (*diag_cmd) return cmd_diagnose(diag, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*cov_cmd) return cmd_coverage(cov, out);
  } catch (const CLI::RequiredError& e) {
    const CLI::App* sub = app.get_subcommands().front();
    err << "zitpo: " << e.what() << "\n\n" << sub->help();
    return kExitInput;
  } catch (const NumericError& e) {
    err << "zitpo: numerical failure: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const std::exception& e) {
    err << "zitpo: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace zitpo::cli
