#pragma once

// Flat key=value run configuration shared by the command-line tool, config
// files, and the metadata header embedded in every dataset.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cavnoise/analysis.hpp"
#include "cavnoise/cavity.hpp"
#include "cavnoise/errors.hpp"
#include "cavnoise/quadrature.hpp"

namespace cavnoise {

enum class OutputFormat { csv, json };

struct RunConfig {
  std::string command = "sweep";

  // cavity
  double r1 = 0.95;
  double t2 = 0.003;
  std::optional<double> r2;  ///< explicit output reflectivity; overrides t2
  ResponseModel model = ResponseModel::exact_airy;

  // state
  double sp = 0.5;
  double sq = 2.0;
  double nu = 6.0;

  // detuning grid
  double delta_min = -12.0;
  double delta_max = 12.0;
  std::size_t points = 2001;

  // analysis-frequency scan
  double nu_min = 0.2;
  double nu_max = 10.0;
  std::size_t steps = 197;

  // impedance-matching study
  std::vector<double> t2_list{0.0, 0.01, 0.025, 0.04, 0.049};

  // oracle
  std::uint64_t seed = 42;
  std::size_t samples = 100000;

  // output (not part of the reproducible metadata)
  OutputFormat format = OutputFormat::csv;
  std::string out;

  MirrorPair mirrors() const {
    return r2 ? MirrorPair(r1, *r2) : MirrorPair::from_loss(r1, t2);
  }
  CavityParams cavity() const { return CavityParams(mirrors(), model); }
  SidebandState state() const { return SidebandState{sp, sq, 0.0, nu}; }

  void set(std::string_view key, std::string_view value);

  /// key=value lines that reproduce this configuration bit for bit.
  std::vector<std::pair<std::string, std::string>> metadata() const;
};

inline const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "command", "r1",     "t2",    "r2",     "model", "sp",    "sq",      "nu",
      "delta-min", "delta-max", "points", "nu-min", "nu-max", "steps", "t2-list", "seed",
      "samples", "format", "out"};
  return keys;
}

inline bool is_run_config_key(std::string_view key) {
  const auto& keys = run_config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

/// Decimal text that reads back to the same double.
inline std::string exact_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  const std::string s(trim(text));
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw InvalidParameter("'" + std::string(key) + "' expects a finite number, got '" + s + "'");
  }
  return v;
}

template <class Int>
Int parse_integer(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InvalidParameter("'" + std::string(key) + "' expects a non-negative integer, got '" +
                           std::string(text) + "'");
  }
  return v;
}

}  // namespace detail

inline void RunConfig::set(std::string_view key, std::string_view value) {
  using detail::parse_double;
  const std::string_view v = detail::trim(value);
  if (key == "command") command = std::string(v);
  else if (key == "r1") r1 = parse_double(key, v);
  else if (key == "t2") { t2 = parse_double(key, v); r2.reset(); }
  else if (key == "r2") r2 = parse_double(key, v);
  else if (key == "model") model = parse_response_model(v);
  else if (key == "sp") sp = parse_double(key, v);
  else if (key == "sq") sq = parse_double(key, v);
  else if (key == "nu") nu = parse_double(key, v);
  else if (key == "delta-min") delta_min = parse_double(key, v);
  else if (key == "delta-max") delta_max = parse_double(key, v);
  else if (key == "points") points = detail::parse_integer<std::size_t>(key, v);
  else if (key == "nu-min") nu_min = parse_double(key, v);
  else if (key == "nu-max") nu_max = parse_double(key, v);
  else if (key == "steps") steps = detail::parse_integer<std::size_t>(key, v);
  else if (key == "seed") seed = detail::parse_integer<std::uint64_t>(key, v);
  else if (key == "samples") samples = detail::parse_integer<std::size_t>(key, v);
  else if (key == "t2-list") {
    t2_list.clear();
    std::string item;
    std::istringstream in{std::string(v)};
    while (std::getline(in, item, ',')) {
      if (!detail::trim(item).empty()) t2_list.push_back(parse_double(key, item));
    }
  } else if (key == "format") {
    if (v == "csv") format = OutputFormat::csv;
    else if (v == "json") format = OutputFormat::json;
    else throw InvalidParameter("format must be csv or json, got '" + std::string(v) + "'");
  } else if (key == "out") out = std::string(v);
  else throw InvalidParameter("unknown configuration key '" + std::string(key) + "'");
}

inline std::vector<std::pair<std::string, std::string>> RunConfig::metadata() const {
  std::vector<std::pair<std::string, std::string>> m;
  m.emplace_back("command", command);
  m.emplace_back("r1", exact_number(r1));
  if (r2) m.emplace_back("r2", exact_number(*r2));
  else m.emplace_back("t2", exact_number(t2));
  m.emplace_back("model", std::string(to_string(model)));
  m.emplace_back("sp", exact_number(sp));
  m.emplace_back("sq", exact_number(sq));
  m.emplace_back("nu", exact_number(nu));
  m.emplace_back("delta-min", exact_number(delta_min));
  m.emplace_back("delta-max", exact_number(delta_max));
  m.emplace_back("points", std::to_string(points));
  m.emplace_back("nu-min", exact_number(nu_min));
  m.emplace_back("nu-max", exact_number(nu_max));
  m.emplace_back("steps", std::to_string(steps));
  std::string list;
  for (std::size_t i = 0; i < t2_list.size(); ++i) list += (i ? "," : "") + exact_number(t2_list[i]);
  m.emplace_back("t2-list", list);
  m.emplace_back("seed", std::to_string(seed));
  m.emplace_back("samples", std::to_string(samples));
  return m;
}

/// Applies key=value settings from config-file text.
///
/// Accepts plain config files and dataset files written by this tool: a line
/// `key=value` or `# key=value` with a known key is applied, other comment
/// lines are skipped, and lines without `=` (CSV header and data rows) are
/// ignored. A non-comment `key=value` with an unknown key is an error.
/// JSON datasets are recognised by a leading `{` and read from metadata.config.
inline void apply_config_text(RunConfig& cfg, std::string_view text) {
  if (detail::trim(text).starts_with("{")) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidParameter(std::string("malformed JSON config: ") + e.what());
    }
    if (!doc.contains("metadata") || !doc["metadata"].contains("config")) {
      throw InvalidParameter("JSON config lacks a metadata.config object");
    }
    for (const auto& [key, value] : doc["metadata"]["config"].items()) {
      if (key == "command") continue;
      if (value.is_number_float()) cfg.set(key, exact_number(value.get<double>()));
      else if (value.is_string()) cfg.set(key, value.get<std::string>());
      else cfg.set(key, value.dump());
    }
    return;
  }
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string_view line = detail::trim(raw);
    const bool comment = line.starts_with("#");
    if (comment) {
      const auto body = line.find_first_not_of('#');
      line = body == std::string_view::npos ? std::string_view{} : detail::trim(line.substr(body));
    }
    const auto eq = line.find('=');
    if (line.empty() || eq == std::string_view::npos) continue;
    const std::string_view key = detail::trim(line.substr(0, eq));
    if (!is_run_config_key(key)) {
      if (comment) continue;
      throw InvalidParameter("unknown configuration key '" + std::string(key) + "'");
    }
    if (key == "command") continue;  // the subcommand being run decides
    cfg.set(key, line.substr(eq + 1));
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str());
}

/// Command-specific defaults, applied before presets, files and flags.
inline void apply_command_defaults(RunConfig& cfg, std::string_view command) {
  cfg.command = std::string(command);
  if (command == "reflectance") {
    cfg.delta_min = -5.0;
    cfg.delta_max = 5.0;
    cfg.points = 1001;
  } else if (command == "oracle") {
    cfg.points = 9;
  } else if (command == "bifurcation") {
    cfg.t2 = 0.0;
    cfg.r1 = 0.999;
  }
}

/// Named parameter sets for the reference datasets (see README).
inline void apply_preset(RunConfig& cfg, std::string_view preset) {
  if (preset == "fig3") {
    cfg.r1 = 0.95;
    cfg.t2 = 0.003;
    cfg.r2.reset();
    cfg.delta_min = -5.0;
    cfg.delta_max = 5.0;
    cfg.points = 1001;
  } else if (preset == "fig6") {
    cfg.r1 = 0.95;
    cfg.t2 = 0.0;
    cfg.r2.reset();
    cfg.nu = 6.0;
    cfg.delta_min = -12.0;
    cfg.delta_max = 12.0;
    cfg.points = 2001;
  } else if (preset == "fig7") {
    cfg.r1 = 0.95;
    cfg.t2 = 0.003;
    cfg.r2.reset();
    cfg.nu = 6.0;
    cfg.sp = 0.5;
    cfg.sq = 2.0;
    cfg.delta_min = -12.0;
    cfg.delta_max = 12.0;
    cfg.points = 2001;
  } else if (preset == "fig8") {
    cfg.r1 = 0.999;
    cfg.t2 = 0.0;
    cfg.r2.reset();
    cfg.sp = 0.5;
    cfg.sq = 2.0;
    cfg.nu_min = 0.2;
    cfg.nu_max = 10.0;
    cfg.steps = 197;
  } else {
    throw InvalidParameter("unknown preset '" + std::string(preset) + "'");
  }
}

}  // namespace cavnoise
