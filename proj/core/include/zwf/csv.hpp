#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace zwf {

// Minimal comma-separated table: header row plus string cells. Quoting is
// not supported; none of the declared file formats need it.
class CsvTable {
public:
  static CsvTable read_file(const std::string& path);

  CsvTable() = default;
  explicit CsvTable(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t n_rows() const { return rows_.size(); }

  bool has_column(const std::string& name) const;
  // Column index; throws validation_error naming the file when missing.
  std::size_t column(const std::string& name) const;

  const std::string& cell(std::size_t row, std::size_t col) const;
  double num(std::size_t row, std::size_t col) const;
  long long integer(std::size_t row, std::size_t col) const;

  void append_row(std::vector<std::string> cells);
  void write_file(const std::string& path) const;

  const std::string& source() const { return source_; }

private:
  std::vector<std::string> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> rows_;
  std::string source_;
};

// Shortest round-trip decimal formatting used by every emitted file, so
// identical runs produce byte-identical output.
std::string format_double(double v);

}  // namespace zwf
