#ifndef CFL_GOLDEN_HPP
#define CFL_GOLDEN_HPP

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cfl/config.hpp"
#include "cfl/experiment.hpp"
#include "cfl/output.hpp"
#include "cfl/types.hpp"

namespace cfl {

struct ColumnTolerance {
  bool exact = false;
  double rel = 0.0;
  double abs = 0.0;
};

struct GoldenOutcome {
  std::string name;
  bool passed = false;
  std::string message;  // first divergence, or "ok"
};

struct GoldenReport {
  bool passed = true;
  std::vector<GoldenOutcome> goldens;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw io_error("cannot open " + p.string());
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

// `column = exact` | `column = rel X [abs Y]` | `column = abs Y [rel X]`
inline std::map<std::string, ColumnTolerance> parse_tolerances(const std::string& text,
                                                               const std::string& origin) {
  std::map<std::string, ColumnTolerance> out;
  for (const auto& [column, value] : parse_kv_text(text)) {
    ColumnTolerance tol;
    std::stringstream ss(value);
    std::string word;
    if (!(ss >> word)) throw config_error(origin + ": empty tolerance for column '" + column + "'");
    if (word == "exact") {
      tol.exact = true;
    } else {
      do {
        double x = 0.0;
        if (!(ss >> x) || (word != "rel" && word != "abs"))
          throw config_error(origin + ": bad tolerance spec '" + value + "' for column '" +
                             column + "'");
        (word == "rel" ? tol.rel : tol.abs) = x;
      } while (ss >> word);
    }
    out[column] = tol;
  }
  return out;
}

inline bool cell_matches(const std::string& expected, const std::string& actual,
                         const ColumnTolerance& tol, std::string& why) {
  if (tol.exact) {
    if (expected == actual) return true;
    why = "expected '" + expected + "', got '" + actual + "' (exact)";
    return false;
  }
  double e = 0.0, a = 0.0;
  try {
    e = std::stod(expected);
    a = std::stod(actual);
  } catch (const std::exception&) {
    if (expected == actual) return true;
    why = "non-numeric mismatch: expected '" + expected + "', got '" + actual + "'";
    return false;
  }
  const double bound = tol.abs + tol.rel * std::max(std::abs(e), std::abs(a));
  if (std::abs(e - a) <= bound) return true;
  why = "expected " + expected + ", got " + actual + " (|diff| = " + format_float(std::abs(e - a)) +
        " > " + format_float(bound) + ")";
  return false;
}

}  // namespace detail

// Re-runs every golden config under <dir> and compares the produced CSV
// against expected.csv cell by cell. Tolerances are fail-closed: the file
// must exist and every column must be listed.
inline GoldenReport golden_check(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw io_error("golden directory not found: " + dir);
  std::vector<fs::path> cases;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / "config")) cases.push_back(entry.path());
  std::sort(cases.begin(), cases.end());
  if (cases.empty()) throw io_error("no goldens found under " + dir);

  GoldenReport report;
  for (const auto& dir_case : cases) {
    GoldenOutcome outcome;
    outcome.name = dir_case.filename().string();

    const fs::path tol_path = dir_case / "tolerances";
    if (!fs::exists(tol_path))
      throw io_error("golden '" + outcome.name + "': tolerances file is missing");
    const auto tolerances =
        detail::parse_tolerances(detail::read_file(tol_path), outcome.name + "/tolerances");

    const ExperimentConfig cfg =
        config_from_kv(parse_kv_text(detail::read_file(dir_case / "config")));
    const ParsedCsv expected = parse_csv(detail::read_file(dir_case / "expected.csv"));
    const ParsedCsv actual = parse_csv(csv_string(run_experiment(cfg).table));

    outcome.passed = false;
    if (expected.records.empty()) {
      outcome.message = "expected.csv has no header";
    } else if (expected.records[0] != actual.records[0]) {
      outcome.message = "column header mismatch";
    } else if (expected.records.size() != actual.records.size()) {
      outcome.message = "row count: expected " + std::to_string(expected.records.size() - 1) +
                        ", got " + std::to_string(actual.records.size() - 1);
    } else {
      const auto& header = expected.records[0];
      for (const auto& col : header)
        if (!tolerances.count(col))
          throw config_error("golden '" + outcome.name + "': no tolerance listed for column '" +
                             col + "'");
      outcome.passed = true;
      outcome.message = "ok";
      for (size_t r = 1; r < expected.records.size() && outcome.passed; ++r) {
        if (expected.records[r].size() != header.size() ||
            actual.records[r].size() != header.size()) {
          outcome.passed = false;
          outcome.message = "row " + std::to_string(r) + ": field count mismatch";
          break;
        }
        for (size_t c = 0; c < header.size(); ++c) {
          std::string why;
          if (!detail::cell_matches(expected.records[r][c], actual.records[r][c],
                                    tolerances.at(header[c]), why)) {
            outcome.passed = false;
            outcome.message = "row " + std::to_string(r) + ", column '" + header[c] + "': " + why;
            break;
          }
        }
      }
    }
    report.passed = report.passed && outcome.passed;
    report.goldens.push_back(outcome);
  }
  return report;
}

}  // namespace cfl

#endif
