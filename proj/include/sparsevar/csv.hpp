#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sparsevar/types.hpp"

namespace sparsevar {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace and optional quotes
    std::size_t b = cell.find_first_not_of(" \t\r\"");
    std::size_t e = cell.find_last_not_of(" \t\r\"");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

struct CsvTable {
  std::vector<std::string> header;
  Matrix values;
};

/// Read a numeric CSV with a header row.  A leading non-numeric column is
/// treated as a time index and dropped.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_data("io", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) fail_data("io", "empty file " + path);
  CsvTable table;
  table.header = detail::split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(detail::split_csv_line(line));
    if (rows.back().size() != table.header.size())
      fail_data("io", "ragged CSV row in " + path);
  }
  if (rows.empty()) fail_data("io", "no data rows in " + path);

  bool drop_first = false;
  for (const auto& row : rows) {
    double v;
    if (!detail::parse_double(row[0], v)) {
      drop_first = true;
      break;
    }
  }
  const int offset = drop_first ? 1 : 0;
  const int ncol = static_cast<int>(table.header.size()) - offset;
  if (ncol < 1) fail_data("io", "no numeric columns in " + path);
  if (drop_first) table.header.erase(table.header.begin());
  table.values.resize(static_cast<int>(rows.size()), ncol);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < ncol; ++j) {
      double v;
      if (!detail::parse_double(rows[i][j + offset], v))
        fail_data("io", "non-numeric cell at row " + std::to_string(i + 2) + " of " + path);
      table.values(static_cast<int>(i), j) = v;
    }
  return table;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const Matrix& values) {
  std::ofstream out(path);
  if (!out) fail_data("io", "cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (int i = 0; i < values.rows(); ++i) {
    for (int j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(values(i, j));
    }
    out << '\n';
  }
  if (!out) fail_data("io", "failed writing " + path);
}

}  // namespace sparsevar
