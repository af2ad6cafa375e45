#pragma once

// CSV ingestion, truncation recoding, model formulas and design matrices.
//
// CSV schema: UTF-8, comma separated, one header row, one observation per
// row. The response is a nonnegative number (minutes). Factor columns are
// declared by the caller; every other column used by a formula must be
// numeric. Empty cells are rejected.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace zitpo {

enum class Coding { Treatment, Sum };

/// Declares a categorical column. Levels are taken in first-appearance
/// order unless listed here.
struct FactorDecl {
  std::string name;
  std::vector<std::string> levels;
};

/// How a factor enters a design. `reference` is the base level for
/// treatment coding and the dropped level for sum coding; empty means the
/// first level (treatment) or the last level (sum).
struct ContrastSpec {
  std::string variable;
  Coding kind = Coding::Treatment;
  std::string reference;
};

struct Column {
  std::string name;
  bool is_factor = false;
  std::vector<double> numeric;
  std::vector<int> codes;           // index into levels
  std::vector<std::string> levels;
};

struct Dataset {
  std::string response;
  Eigen::VectorXd y;
  std::vector<Column> frame;
  double y_trunc = 0.0;
  std::size_t recode_count = 0;

  std::size_t rows() const { return static_cast<std::size_t>(y.size()); }
  /// nullptr when absent.
  const Column* find(std::string_view name) const;
};

/// Sets values in (0, y_trunc] to zero; returns how many were moved.
std::size_t recode_truncated(Eigen::VectorXd& y, double y_trunc);

/// `columns` restricts which non-response columns are loaded (all when
/// empty), so unrelated text columns do not need to parse.
Dataset read_csv(const std::string& path, const std::string& response, double y_trunc,
                 const std::vector<FactorDecl>& factors,
                 const std::vector<std::string>& columns = {});
Dataset parse_csv(std::istream& in, const std::string& response, double y_trunc,
                  const std::vector<FactorDecl>& factors,
                  const std::vector<std::string>& columns = {});

class FormulaError : public std::invalid_argument {
 public:
  FormulaError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct Term {
  std::string first;
  std::string second;  // empty for a main effect

  bool is_interaction() const { return !second.empty(); }
  bool involves(std::string_view variable) const { return first == variable || second == variable; }
  std::string label() const { return is_interaction() ? first + ":" + second : first; }
};

/// Ordered terms; the intercept is implicit.
struct FormulaSpec {
  std::vector<Term> terms;

  std::vector<std::string> variables() const;
  bool contains(std::string_view label) const;
};

/// Grammar: terms separated by commas, term = identifier | identifier ":" identifier.
/// An empty string is the intercept-only model.
FormulaSpec parse_formula(std::string_view text);

/// Removes `label` and, when it names a variable, every interaction that
/// involves it. Throws std::invalid_argument if nothing matches.
FormulaSpec drop_term(const FormulaSpec& formula, const std::string& label);

struct Design {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
  /// Column count contributed by each formula term, in order.
  std::vector<std::pair<std::string, std::size_t>> term_widths;
};

Design build_design(const Dataset& ds, const FormulaSpec& formula,
                    const std::vector<ContrastSpec>& contrasts);

}  // namespace zitpo
