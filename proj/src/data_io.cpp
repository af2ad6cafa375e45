#include "zitpo/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>

#include "zitpo/error.hpp"
#include "zitpo/model.hpp"

namespace zitpo {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one CSV record. Double quotes delimit fields containing commas;
// "" inside a quoted field is a literal quote.
std::vector<std::string> split_record(std::string_view line, std::optional<std::size_t> row) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : std::string(trim(field)));
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted field", row);
  fields.push_back(was_quoted ? field : std::string(trim(field)));
  return fields;
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

struct Coded {
  Eigen::MatrixXd cols;
  std::vector<std::string> names;
};

Coded code_variable(const Dataset& ds, const std::string& var,
                    const std::vector<ContrastSpec>& contrasts) {
  const Column* col = ds.find(var);
  if (col == nullptr) throw DataError("formula references an unknown variable", {}, var);
  const auto n = static_cast<Eigen::Index>(ds.rows());
  Coded out;
  if (!col->is_factor) {
    out.cols = Eigen::Map<const Eigen::VectorXd>(col->numeric.data(), n);
    out.names.push_back(var);
    return out;
  }

  ContrastSpec spec{var, Coding::Treatment, {}};
  for (const auto& c : contrasts) {
    if (c.variable == var) spec = c;
  }
  const auto& levels = col->levels;
  const auto k = static_cast<int>(levels.size());
  int ref = spec.kind == Coding::Treatment ? 0 : k - 1;
  if (!spec.reference.empty()) {
    const auto it = std::find(levels.begin(), levels.end(), spec.reference);
    if (it == levels.end()) {
      throw DataError("contrast reference level '" + spec.reference + "' is not a level", {}, var);
    }
    ref = static_cast<int>(it - levels.begin());
  }
  out.cols = Eigen::MatrixXd::Zero(n, std::max(0, k - 1));
  Eigen::Index c = 0;
  for (int level = 0; level < k; ++level) {
    if (level == ref) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int code = col->codes[static_cast<std::size_t>(i)];
      if (code == level) {
        out.cols(i, c) = 1.0;
      } else if (spec.kind == Coding::Sum && code == ref) {
        out.cols(i, c) = -1.0;
      }
    }
    out.names.push_back(var + "[" + levels[static_cast<std::size_t>(level)] + "]");
    ++c;
  }
  return out;
}

}  // namespace

const Column* Dataset::find(std::string_view name) const {
  for (const auto& c : frame) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::size_t recode_truncated(Eigen::VectorXd& y, double y_trunc) {
  std::size_t moved = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0 && y[i] <= y_trunc) {
      y[i] = 0.0;
      ++moved;
    }
  }
  return moved;
}

Dataset read_csv(const std::string& path, const std::string& response, double y_trunc,
                 const std::vector<FactorDecl>& factors, const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return parse_csv(in, response, y_trunc, factors, columns);
}

Dataset parse_csv(std::istream& in, const std::string& response, double y_trunc,
                  const std::vector<FactorDecl>& factors, const std::vector<std::string>& columns) {
  if (!(y_trunc >= 0.0) || !std::isfinite(y_trunc)) throw DataError("y_trunc must be >= 0");
  std::string line;
  if (!std::getline(in, line)) throw DataError("data file is empty; a header row is required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_record(line, std::nullopt);

  auto index_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column", {}, name);
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t response_idx = index_of(response);
  std::vector<std::string> wanted = columns;
  if (wanted.empty()) {
    for (const auto& h : header) {
      if (h != response) wanted.push_back(h);
    }
  }
  for (const auto& f : factors) {
    if (std::find(wanted.begin(), wanted.end(), f.name) == wanted.end()) wanted.push_back(f.name);
  }

  Dataset ds;
  ds.response = response;
  ds.y_trunc = y_trunc;
  std::vector<std::size_t> source;
  std::vector<const FactorDecl*> decl;
  for (const auto& name : wanted) {
    if (name == response || ds.find(name) != nullptr) continue;
    source.push_back(index_of(name));
    Column col;
    col.name = name;
    const FactorDecl* d = nullptr;
    for (const auto& f : factors) {
      if (f.name == name) d = &f;
    }
    if (d != nullptr) {
      col.is_factor = true;
      col.levels = d->levels;
    }
    decl.push_back(d);
    ds.frame.push_back(std::move(col));
  }

  std::vector<double> y;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, row);
    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      row);
    }
    const std::string& ycell = fields[response_idx];
    if (ycell.empty()) throw DataError("missing value", row, response);
    const auto yv = parse_number(ycell);
    if (!yv) throw DataError("cannot parse '" + ycell + "' as a number", row, response);
    if (*yv < 0.0) throw DataError("negative response", row, response);
    y.push_back(*yv);

    for (std::size_t c = 0; c < ds.frame.size(); ++c) {
      Column& col = ds.frame[c];
      const std::string& cell = fields[source[c]];
      if (cell.empty()) throw DataError("missing value", row, col.name);
      if (!col.is_factor) {
        const auto v = parse_number(cell);
        if (!v) throw DataError("cannot parse '" + cell + "' as a number", row, col.name);
        col.numeric.push_back(*v);
        continue;
      }
      auto it = std::find(col.levels.begin(), col.levels.end(), cell);
      if (it == col.levels.end()) {
        if (!decl[c]->levels.empty()) {
          throw DataError("unseen level '" + cell + "' (not among the declared levels)", row,
                          col.name);
        }
        col.levels.push_back(cell);
        it = col.levels.end() - 1;
      }
      col.codes.push_back(static_cast<int>(it - col.levels.begin()));
    }
    ++row;
  }
  if (y.empty()) throw DataError("data file has no observations");

  ds.y = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  ds.recode_count = recode_truncated(ds.y, y_trunc);
  return ds;
}

std::vector<std::string> FormulaSpec::variables() const {
  std::vector<std::string> out;
  auto add = [&out](const std::string& v) {
    if (!v.empty() && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  for (const auto& t : terms) {
    add(t.first);
    add(t.second);
  }
  return out;
}

bool FormulaSpec::contains(std::string_view label) const {
  return std::any_of(terms.begin(), terms.end(),
                     [&](const Term& t) { return t.label() == label; });
}

FormulaSpec parse_formula(std::string_view text) {
  FormulaSpec out;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  auto identifier = [&]() -> std::string {
    skip_ws();
    if (pos >= text.size()) throw FormulaError("expected a variable name, found end of input", pos);
    if (!is_ident_start(text[pos])) {
      throw FormulaError(std::string("unexpected '") + text[pos] + "'", pos);
    }
    const std::size_t start = pos;
    while (pos < text.size() && is_ident_char(text[pos])) ++pos;
    return std::string(text.substr(start, pos - start));
  };

  skip_ws();
  if (pos == text.size()) return out;
  for (;;) {
    skip_ws();
    const std::size_t term_start = pos;
    Term term{identifier(), {}};
    skip_ws();
    if (pos < text.size() && text[pos] == ':') {
      ++pos;
      term.second = identifier();
      if (term.second == term.first) {
        throw FormulaError("interaction of a variable with itself", term_start);
      }
      skip_ws();
    }
    for (const auto& t : out.terms) {
      const bool same = t.first == term.first && t.second == term.second;
      const bool swapped = term.is_interaction() && t.first == term.second && t.second == term.first;
      if (same || swapped) throw FormulaError("duplicate term '" + term.label() + "'", term_start);
    }
    out.terms.push_back(std::move(term));
    if (pos == text.size()) break;
    if (text[pos] != ',') throw FormulaError(std::string("unexpected '") + text[pos] + "'", pos);
    ++pos;
  }
  return out;
}

FormulaSpec drop_term(const FormulaSpec& formula, const std::string& label) {
  FormulaSpec out;
  const auto colon = label.find(':');
  for (const auto& t : formula.terms) {
    bool drop;
    if (colon == std::string::npos) {
      drop = t.involves(label);
    } else {
      const std::string a = label.substr(0, colon);
      const std::string b = label.substr(colon + 1);
      drop = t.is_interaction() && ((t.first == a && t.second == b) || (t.first == b && t.second == a));
    }
    if (!drop) out.terms.push_back(t);
  }
  if (out.terms.size() == formula.terms.size()) {
    throw std::invalid_argument("term '" + label + "' is not in the model");
  }
  return out;
}

Design build_design(const Dataset& ds, const FormulaSpec& formula,
                    const std::vector<ContrastSpec>& contrasts) {
  const auto n = static_cast<Eigen::Index>(ds.rows());
  std::vector<Eigen::MatrixXd> blocks{Eigen::MatrixXd::Ones(n, 1)};
  Design d;
  d.names.emplace_back("(Intercept)");
  Eigen::Index width = 1;
  for (const auto& term : formula.terms) {
    Coded a = code_variable(ds, term.first, contrasts);
    if (term.is_interaction()) {
      const Coded b = code_variable(ds, term.second, contrasts);
      Coded prod;
      prod.cols.resize(n, a.cols.cols() * b.cols.cols());
      Eigen::Index c = 0;
      for (Eigen::Index j = 0; j < b.cols.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.cols.cols(); ++i) {
          prod.cols.col(c++) = a.cols.col(i).cwiseProduct(b.cols.col(j));
          prod.names.push_back(a.names[static_cast<std::size_t>(i)] + ":" +
                               b.names[static_cast<std::size_t>(j)]);
        }
      }
      a = std::move(prod);
    }
    d.term_widths.emplace_back(term.label(), static_cast<std::size_t>(a.cols.cols()));
    d.names.insert(d.names.end(), a.names.begin(), a.names.end());
    width += a.cols.cols();
    blocks.push_back(std::move(a.cols));
  }
  d.x.resize(n, width);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    d.x.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  require_full_rank(d.x, d.names, "model");
  return d;
}

}  // namespace zitpo
