#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

// Plot-ready table emission. CSV prints every floating-point cell with 17
// significant digits and carries the effective configuration as "# key =
// value" comment lines, so repeated runs are byte-identical and goldens are
// stable. JSON-lines emits one meta object followed by one object per row.

namespace swiptdf {

enum class OutputFormat { Csv, JsonLines };

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::pair<std::string, std::string>> meta;  // emitted in order
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline void write_table(std::ostream& os, const Table& table, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    for (const auto& [key, value] : table.meta) os << "# " << key << " = " << value << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      os << (i ? "," : "") << table.columns[i];
    os << "\n";
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ",";
        if (const auto* d = std::get_if<double>(&row[i]))
          os << fmt_double(*d);
        else if (const auto* n = std::get_if<std::int64_t>(&row[i]))
          os << *n;
        else
          os << std::get<std::string>(row[i]);
      }
      os << "\n";
    }
    return;
  }
  nlohmann::json meta = nlohmann::json::object();
  for (const auto& [key, value] : table.meta) meta[key] = value;
  os << nlohmann::json{{"meta", meta}}.dump() << "\n";
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < table.columns.size(); ++i) {
      if (const auto* d = std::get_if<double>(&row[i]))
        obj[table.columns[i]] = *d;
      else if (const auto* n = std::get_if<std::int64_t>(&row[i]))
        obj[table.columns[i]] = *n;
      else
        obj[table.columns[i]] = std::get<std::string>(row[i]);
    }
    os << obj.dump() << "\n";
  }
}

}  // namespace swiptdf
