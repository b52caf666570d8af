#include "tvsieve/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tvsieve/errors.hpp"

namespace tvsieve {

int Table::find(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

const std::vector<double>& Table::column(const std::string& name) const {
  int idx = find(name);
  if (idx < 0) throw IngestError("missing column '" + name + "'");
  return columns[idx];
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open '" + path + "'");
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IngestError("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.header.push_back(cell);
  }
  if (table.header.empty()) throw IngestError("'" + path + "' has an empty header");
  table.columns.assign(table.header.size(), {});

  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= table.header.size())
        throw IngestError("'" + path + "' row " + std::to_string(row) + ": too many fields");
      const char* begin = cell.c_str();
      char* end = nullptr;
      double value = std::strtod(begin, &end);
      if (end == begin || *end != '\0')
        throw IngestError("'" + path + "' row " + std::to_string(row) + ", column '" +
                          table.header[col] + "': non-numeric value '" + cell + "'");
      table.columns[col].push_back(value);
      ++col;
    }
    if (col != table.header.size())
      throw IngestError("'" + path + "' row " + std::to_string(row) + ": expected " +
                        std::to_string(table.header.size()) + " fields, got " +
                        std::to_string(col));
  }
  return table;
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write '" + path + "'");
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  const long rows = table.rows();
  for (const auto& col : table.columns)
    if (static_cast<long>(col.size()) != rows)
      throw IngestError("write_csv: ragged columns for '" + path + "'");
  for (long r = 0; r < rows; ++r) {
    for (size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out << ',';
      out << format_double(table.columns[c][r]);
    }
    out << '\n';
  }
  if (!out) throw IngestError("write failed for '" + path + "'");
}

}  // namespace tvsieve
