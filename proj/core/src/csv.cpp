#include "zwf/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "zwf/errors.hpp"

namespace zwf {

std::string format_double(double v) {
  char buf[32];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  // %.17g round-trips every double; trim to the shortest form that does.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (back != back && v != v)) break;
  }
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> columns)
    : columns_(std::move(columns)) {
  for (std::size_t i = 0; i < columns_.size(); ++i) index_[columns_[i]] = i;
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path);
  CsvTable t;
  t.source_ = path;
  std::string line;
  if (!std::getline(in, line))
    throw validation_error(path + ": empty file, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) t.columns_.push_back(cell);
  for (std::size_t i = 0; i < t.columns_.size(); ++i)
    t.index_[t.columns_[i]] = i;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != t.columns_.size())
      throw validation_error(path + ":" + std::to_string(lineno) + ": has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(t.columns_.size()));
    t.rows_.push_back(std::move(cells));
  }
  return t;
}

bool CsvTable::has_column(const std::string& name) const {
  return index_.count(name) > 0;
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw validation_error(source_ + ": missing column '" + name + "'");
  return it->second;
}

const std::string& CsvTable::cell(std::size_t row, std::size_t col) const {
  return rows_.at(row).at(col);
}

double CsvTable::num(std::size_t row, std::size_t col) const {
  const std::string& s = cell(row, col);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw validation_error(source_ + ": row " + std::to_string(row + 2) +
                           ": '" + s + "' is not a number");
  return v;
}

long long CsvTable::integer(std::size_t row, std::size_t col) const {
  const std::string& s = cell(row, col);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw validation_error(source_ + ": row " + std::to_string(row + 2) +
                           ": '" + s + "' is not an integer");
  return v;
}

void CsvTable::append_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size())
    throw validation_error("append_row: cell count mismatch");
  rows_.push_back(std::move(cells));
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw validation_error("cannot write " + path);
  for (std::size_t i = 0; i < columns_.size(); ++i)
    out << (i ? "," : "") << columns_[i];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  if (!out) throw validation_error("write failed: " + path);
}

}  // namespace zwf
