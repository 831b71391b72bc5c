#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tsadbench/errors.hpp"

namespace tsadbench {
namespace csv {

// The formats used here never quote: identifiers and numbers only.
inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

inline std::vector<std::vector<std::string>> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BenchError(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    rows.push_back(split_line(line));
  }
  return rows;
}

// Fixed decimal output trimmed of trailing zeros: deterministic, compact,
// and stable across runs of the same binary.
inline std::string format_double(double value, int precision = 6) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  std::string s(buffer);
  if (s.find('.') != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

inline double parse_double(const std::string& field, const std::string& where) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(field, &consumed);
    if (consumed != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw BenchError(ErrorCode::ParseError, where + ": bad number '" + field + "'");
  }
}

inline std::int64_t parse_int(const std::string& field, const std::string& where) {
  try {
    std::size_t consumed = 0;
    const std::int64_t v = std::stoll(field, &consumed);
    if (consumed != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw BenchError(ErrorCode::ParseError, where + ": bad integer '" + field + "'");
  }
}

}  // namespace csv
}  // namespace tsadbench
