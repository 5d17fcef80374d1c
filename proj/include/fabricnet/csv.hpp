#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fabricnet::io {

// Comma-separated UTF-8 table. The first line is a schema comment
// ("# schema: <name> v<version>"), the second the column header. Floats
// carry 9 significant digits. A row completes automatically once every
// column has received a cell.
class CsvTable {
 public:
  CsvTable(std::string schema_name, int schema_version, std::vector<std::string> columns);

  CsvTable& cell(const std::string& value);
  CsvTable& cell(double value);
  CsvTable& cell(int value);
  CsvTable& cell(std::uint64_t value);

  std::size_t rows() const { return rows_; }
  std::string to_string() const;
  void write_file(const std::string& path) const;

  static std::string format(double value);

 private:
  std::string schema_name_;
  int schema_version_;
  std::vector<std::string> columns_;
  std::vector<std::string> lines_;
  std::string current_;
  std::size_t current_cells_ = 0;
  std::size_t rows_ = 0;
};

// Parsed CSV produced by CsvTable: schema line, header, string cells.
struct CsvFile {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

CsvFile read_csv_file(const std::string& path);

}  // namespace fabricnet::io
