#pragma once

#include <string>
#include <vector>

namespace tvsieve {

/// Numeric table with a header row.  Files are UTF-8, '.' decimal, '\n'
/// newlines; floats round-trip exactly (17 significant digits).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  long rows() const { return columns.empty() ? 0 : static_cast<long>(columns[0].size()); }
  int find(const std::string& name) const;          // -1 when absent
  const std::vector<double>& column(const std::string& name) const;  // throws IngestError
};

Table read_csv(const std::string& path);
void write_csv(const std::string& path, const Table& table);

std::string format_double(double value);

}  // namespace tvsieve
