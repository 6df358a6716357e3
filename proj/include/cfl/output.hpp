#ifndef CFL_OUTPUT_HPP
#define CFL_OUTPUT_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "cfl/types.hpp"

namespace cfl {

inline constexpr const char* kToolName = "cfl";
inline constexpr const char* kToolVersion = "0.1.0";

using Cell = std::variant<std::string, double>;

struct Table {
  std::string provenance;  // single comment line below which the data reproduces
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// fixed 17-significant-digit scientific notation; goldens depend on the bytes
inline std::string format_float(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string cell_text(const Cell& cell) {
  if (std::holds_alternative<double>(cell)) return format_float(std::get<double>(cell));
  return std::get<std::string>(cell);
}

inline std::string csv_string(const Table& table) {
  std::string out;
  out += "# " + table.provenance + "\n";
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += csv_escape(table.columns[c]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += csv_escape(cell_text(row[c]));
    }
    out += '\n';
  }
  return out;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

inline std::string json_cell(const Cell& cell) {
  if (std::holds_alternative<double>(cell)) {
    const double x = std::get<double>(cell);
    if (!std::isfinite(x)) return "\"" + format_float(x) + "\"";
    return format_float(x);
  }
  return "\"" + json_escape(std::get<std::string>(cell)) + "\"";
}

inline std::string json_string(const Table& table) {
  std::string out = "{\n  \"provenance\": \"" + json_escape(table.provenance) + "\",\n";
  out += "  \"columns\": [";
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ", ";
    out += "\"" + json_escape(table.columns[c]) + "\"";
  }
  out += "],\n  \"rows\": [\n";
  for (size_t r = 0; r < table.rows.size(); ++r) {
    out += "    [";
    for (size_t c = 0; c < table.rows[r].size(); ++c) {
      if (c) out += ", ";
      out += json_cell(table.rows[r][c]);
    }
    out += r + 1 < table.rows.size() ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open output file: " + path);
  f << content;
  if (!f) throw io_error("write failed: " + path);
}

// JSON metadata sidecar: everything needed to reproduce the table from
// scratch, plus run diagnostics. Wall time lives here and never in the CSV,
// which stays byte-identical across reruns.
inline std::string meta_sidecar_string(const std::string& experiment,
                                       const std::map<std::string, std::string>& config_echo,
                                       const Table& table,
                                       const std::map<std::string, double>& diagnostics,
                                       double wall_seconds) {
  std::string out = "{\n";
  out += "  \"tool\": \"" + std::string(kToolName) + "\",\n";
  out += "  \"version\": \"" + std::string(kToolVersion) + "\",\n";
  out += "  \"experiment\": \"" + json_escape(experiment) + "\",\n";
  out += "  \"config\": {\n";
  size_t i = 0;
  for (const auto& [k, v] : config_echo) {
    out += "    \"" + json_escape(k) + "\": \"" + json_escape(v) + "\"";
    out += ++i < config_echo.size() ? ",\n" : "\n";
  }
  out += "  },\n";
  out += "  \"columns\": [";
  for (size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ", ";
    out += "\"" + json_escape(table.columns[c]) + "\"";
  }
  out += "],\n";
  out += "  \"row_count\": " + std::to_string(table.rows.size()) + ",\n";
  out += "  \"diagnostics\": {\n";
  i = 0;
  for (const auto& [k, v] : diagnostics) {
    out += "    \"" + json_escape(k) + "\": ";
    out += std::isfinite(v) ? format_float(v) : "\"" + format_float(v) + "\"";
    out += ++i < diagnostics.size() ? ",\n" : "\n";
  }
  out += "  },\n";
  out += "  \"wall_time_seconds\": " + format_float(wall_seconds) + "\n";
  out += "}\n";
  return out;
}

// minimal RFC-4180 reader used by the golden checker; leading '#' comment
// lines are collected separately
struct ParsedCsv {
  std::vector<std::string> comments;
  std::vector<std::vector<std::string>> records;  // header is records[0]
};

inline ParsedCsv parse_csv(const std::string& text) {
  ParsedCsv out;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    if (text[i] == '#' && (out.records.empty())) {
      size_t end = text.find('\n', i);
      if (end == std::string::npos) end = n;
      out.comments.push_back(text.substr(i, end - i));
      i = end + 1;
      continue;
    }
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool done = false;
    while (i < n && !done) {
      const char c = text[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            quoted = false;
            ++i;
          }
        } else {
          field += c;
          ++i;
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
        ++i;
      } else if (c == ',') {
        record.push_back(field);
        field.clear();
        ++i;
      } else if (c == '\n') {
        ++i;
        done = true;
      } else if (c == '\r') {
        ++i;  // tolerate CRLF on read
      } else {
        field += c;
        ++i;
      }
    }
    if (quoted) throw io_error("unterminated quoted CSV field");
    record.push_back(field);
    if (!(record.size() == 1 && record[0].empty())) out.records.push_back(record);
  }
  return out;
}

}  // namespace cfl

#endif
