#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "fracreg/experiments.hpp"
#include "fracreg/io.hpp"

namespace fracreg {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;

/// Non-finite values become null.
inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const ExperimentParams& p) {
  Json cover = Json::array();
  for (const auto& b : p.cover) {
    Json c = Json::array();
    for (int k = 0; k < p.dim; ++k) c.push_back(b.center[k]);
    cover.push_back({{"center", c}, {"radius", b.radius}});
  }
  return Json{{"dim", p.dim},
              {"s", p.s},
              {"p", p.p},
              {"p_grid", p.p_grid},
              {"lambda", p.lambda},
              {"big_lambda", p.big_lambda},
              {"N1", p.N1},
              {"delta", p.delta},
              {"eps", p.eps},
              {"eps1", p.eps1},
              {"M", p.M},
              {"gamma", p.gamma},
              {"K", p.K},
              {"deltas", p.deltas},
              {"alpha_factors", p.alpha_factors},
              {"refinements", p.refinements},
              {"seed", p.seed},
              {"kernel", p.kernel},
              {"instances", p.instances},
              {"box_radius", p.box_radius},
              {"data_cell", p.data_cell},
              {"kernel_cell", p.kernel_cell},
              {"f_amplitude", p.f_amplitude},
              {"g_amplitude", p.g_amplitude},
              {"exterior", p.exterior},
              {"exterior_amplitude", p.exterior_amplitude},
              {"r", p.r},
              {"R", p.R},
              {"shift", p.shift},
              {"torus_length", p.torus_length},
              {"cover", cover},
              {"cover_region", p.cover_region},
              {"tolerance", p.tolerance}};
}

inline Json to_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json row = Json::array();
    for (double v : r) row.push_back(json_number(v));
    rows.push_back(std::move(row));
  }
  return Json{{"name", t.name}, {"columns", t.columns}, {"rows", rows}};
}

/// Deterministic report; wall-clock time is written separately.
inline Json to_json(const ExperimentReport& r) {
  Json criteria = Json::array();
  for (const auto& c : r.criteria) criteria.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  Json tables = Json::array();
  for (const auto& t : r.tables) tables.push_back(to_json(t));
  return Json{{"schema", kReportSchema}, {"experiment", r.name}, {"params", to_json(r.params)},
              {"criteria", criteria},      {"tables", tables},        {"notes", r.notes},
              {"passed", r.passed()}};
}

inline std::string report_text(const ExperimentReport& r) { return to_json(r).dump(2) + "\n"; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

inline void write_table_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
}

/// <dir>/<name>.json, <dir>/<name>.<table>.csv and <dir>/<name>.timing.json.
inline void write_report(const std::filesystem::path& dir, const ExperimentReport& r) {
  std::filesystem::create_directories(dir);
  write_text(dir / (r.name + ".json"), report_text(r));
  for (const auto& t : r.tables) write_table_csv(dir / (r.name + "." + t.name + ".csv"), t);
  const Json timing{{"schema", kReportSchema}, {"experiment", r.name}, {"wall_clock_seconds", r.wall_clock_seconds}};
  write_text(dir / (r.name + ".timing.json"), timing.dump(2) + "\n");
}

}  // namespace fracreg
