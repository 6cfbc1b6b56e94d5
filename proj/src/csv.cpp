#include "geoq/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace geoq {

int CsvTable::column_index(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw std::runtime_error("missing column \"" + name + "\"");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[idx]);
  return out;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read \"" + path + "\"");

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file \"" + path + "\"");
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row_stream(line);
    std::vector<double> row;
    while (std::getline(row_stream, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("non-numeric cell \"" + cell + "\" in \"" + path + "\"");
      }
    }
    if (row.size() != table.columns.size()) {
      throw std::runtime_error("ragged row in \"" + path + "\"");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_full(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace geoq
