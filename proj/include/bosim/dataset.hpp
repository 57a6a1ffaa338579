// Copyright 2026 the bosim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BOSIM_DATASET_HPP
#define BOSIM_DATASET_HPP

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bosim/error.hpp"

namespace bosim {

// Rectangular table of doubles with named columns. Serialization is fixed to
// '%.12e' cells, comma separators and LF line endings so that identical runs
// produce identical bytes on every platform.
struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(const std::vector<double>& row) {
    if (row.size() != columns.size()) fail(ErrorCode::InvalidDataset, "row width does not match header");
    rows.push_back(row);
  }

  int column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    fail(ErrorCode::InvalidDataset, "no column named '" + name + "'");
  }

  std::vector<double> column(const std::string& name) const {
    const size_t idx = static_cast<size_t>(column_index(name));
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
  }
};

inline std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

inline void write_csv(const Dataset& ds, std::ostream& os) {
  for (size_t i = 0; i < ds.columns.size(); ++i) {
    if (i) os << ',';
    os << ds.columns[i];
  }
  os << '\n';
  for (const auto& row : ds.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_cell(row[i]);
    }
    os << '\n';
  }
}

inline void write_csv_file(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: keep LF endings everywhere
  if (!os) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  write_csv(ds, os);
  if (!os) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

inline Dataset read_csv(std::istream& is) {
  Dataset ds;
  std::string line;
  if (!std::getline(is, line)) fail(ErrorCode::InvalidDataset, "empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) ds.columns.push_back(cell);
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        fail(ErrorCode::InvalidDataset, "line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      if (used != cell.size())
        fail(ErrorCode::InvalidDataset, "line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != ds.columns.size())
      fail(ErrorCode::InvalidDataset, "line " + std::to_string(lineno) + ": row width does not match header");
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

inline Dataset read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_csv(is);
}

}  // namespace bosim

#endif
