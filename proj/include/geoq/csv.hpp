#pragma once

#include <string>
#include <vector>

// Minimal numeric CSV support for the CLI and its round-trip tests.

namespace geoq {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  // -1 when the column is absent.
  int column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;  // throws if absent
};

CsvTable read_csv(const std::string& path);

// Full-precision formatting (17 significant digits) so reruns are byte-exact.
std::string format_full(double value);

}  // namespace geoq
