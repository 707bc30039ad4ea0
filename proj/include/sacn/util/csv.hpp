#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "sacn/errors.hpp"

namespace sacn::util {

/// Shortest decimal that round-trips; "inf"/"-inf"/"nan" for non-finite.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  if (s == "nan") return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Header-keyed CSV table, no quoting (none of the emitted fields need it).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ConfigError("CSV is missing column '" + name + "'");
  }
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV");
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    auto row = split(line);
    if (row.size() != t.header.size()) throw ConfigError("CSV row has wrong field count: " + line);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace sacn::util
