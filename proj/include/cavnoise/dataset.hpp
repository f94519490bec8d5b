#pragma once

// Tabular datasets with an embedded configuration header, written as CSV or JSON.
//
// CSV: UTF-8, LF line endings, `#`-prefixed metadata lines, one header row,
// numbers with 9 significant digits and `.` as decimal separator.

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace cavnoise {

using Cell = std::variant<double, std::string>;

struct Dataset {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> notes;  ///< excluded points, failures, warnings
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const Dataset& data) {
  out << "# cavnoise " << data.command << '\n';
  for (const auto& [key, value] : data.config) out << "# " << key << '=' << value << '\n';
  for (const auto& note : data.notes) out << "# " << note << '\n';
  for (std::size_t i = 0; i < data.columns.size(); ++i) out << (i ? "," : "") << data.columns[i];
  out << '\n';
  for (const auto& row : data.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      if (const double* v = std::get_if<double>(&row[i])) out << format_value(*v);
      else out << std::get<std::string>(row[i]);
    }
    out << '\n';
  }
}

inline nlohmann::ordered_json to_json(const Dataset& data) {
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : data.config) config[key] = value;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : data.rows) {
    nlohmann::ordered_json record = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < data.columns.size(); ++i) {
      if (const double* v = std::get_if<double>(&row[i])) {
        // Same 9 significant digits as the CSV.
        record[data.columns[i]] = std::strtod(format_value(*v).c_str(), nullptr);
      } else {
        record[data.columns[i]] = std::get<std::string>(row[i]);
      }
    }
    rows.push_back(std::move(record));
  }
  return {{"metadata", {{"command", data.command}, {"config", config}, {"notes", data.notes}}},
          {"columns", data.columns},
          {"rows", rows}};
}

inline void write_json(std::ostream& out, const Dataset& data) {
  out << to_json(data).dump(2) << '\n';
}

}  // namespace cavnoise
