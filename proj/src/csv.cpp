#include "fabricnet/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace fabricnet::io {

CsvTable::CsvTable(std::string schema_name, int schema_version,
                   std::vector<std::string> columns)
    : schema_name_(std::move(schema_name)),
      schema_version_(schema_version),
      columns_(std::move(columns)) {
  if (columns_.empty()) throw std::invalid_argument("CsvTable: no columns");
}

CsvTable& CsvTable::cell(const std::string& value) {
  if (value.find_first_of(",\n\r") != std::string::npos)
    throw std::invalid_argument("CsvTable: cell contains a separator");
  if (current_cells_) current_ += ',';
  current_ += value;
  if (++current_cells_ == columns_.size()) {
    lines_.push_back(current_);
    current_.clear();
    current_cells_ = 0;
    ++rows_;
  }
  return *this;
}

CsvTable& CsvTable::cell(double value) { return cell(format(value)); }

CsvTable& CsvTable::cell(int value) { return cell(std::to_string(value)); }

CsvTable& CsvTable::cell(std::uint64_t value) { return cell(std::to_string(value)); }

std::string CsvTable::format(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string CsvTable::to_string() const {
  std::string out = "# schema: " + schema_name_ + " v" + std::to_string(schema_version_) + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const std::string& line : lines_) {
    out += line;
    out += '\n';
  }
  if (current_cells_ != 0) throw std::logic_error("CsvTable: unfinished row");
  return out;
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("CsvTable: cannot open " + path);
  f << to_string();
  if (!f) throw std::runtime_error("CsvTable: write failed for " + path);
}

CsvFile read_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_csv_file: cannot open " + path);
  CsvFile out;
  std::string line;
  bool header_seen = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (!header_seen) out.schema += line;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (!header_seen) {
      out.columns = std::move(cells);
      header_seen = true;
    } else {
      out.rows.push_back(std::move(cells));
    }
  }
  if (!header_seen) throw std::runtime_error("read_csv_file: no header in " + path);
  return out;
}

}  // namespace fabricnet::io
