#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lanewave/errors.hpp"
#include "lanewave/scenarios.hpp"

// Plain key-value run configuration: one `key = value` per line, `#`
// comments. Every numeric model, grid and scenario field is reachable
// through a named override key; unknown keys are rejected.

namespace lanewave::config {

struct RunConfig {
  std::string scenario = "micro-macro";
  scenarios::ScenarioSpec spec = scenarios::build_scenario("micro-macro");
  bool write_csv = true;
  bool write_pgm = false;

  // state inputs for the riemann and eigen commands
  PrimitiveState left{0.5, 0.8, 0.0};
  PrimitiveState right{0.5, 0.8, 0.0};
  double xi_x = 1.0;
  double xi_y = 0.0;
};

struct SchemaEntry {
  const char* key;
  double (*get)(const RunConfig&);
  void (*set)(RunConfig&, double);
  bool integral = false;
};

/// Override schema: every ModelParams, Grid2D and ScenarioSpec numeric
/// field plus the riemann/eigen state inputs.
inline const std::vector<SchemaEntry>& schema() {
#define LW_FIELD(NAME, EXPR) \
  SchemaEntry { NAME, [](const RunConfig& c) -> double { return c.EXPR; }, \
                [](RunConfig& c, double v) { c.EXPR = v; } }
#define LW_IFIELD(NAME, EXPR) \
  SchemaEntry { NAME, [](const RunConfig& c) -> double { return static_cast<double>(c.EXPR); }, \
                [](RunConfig& c, double v) { c.EXPR = static_cast<int>(std::llround(v)); }, true }
  static const std::vector<SchemaEntry> entries{
      LW_FIELD("u_ref", spec.params.u_ref),
      LW_FIELD("v_ref", spec.params.v_ref),
      LW_FIELD("gamma1", spec.params.gamma1),
      LW_FIELD("gamma2", spec.params.gamma2),
      LW_FIELD("rho_floor", spec.params.rho_floor),
      LW_FIELD("rho_max", spec.params.rho_max),
      LW_IFIELD("nx", spec.grid.nx),
      LW_IFIELD("ny", spec.grid.ny),
      LW_FIELD("ax", spec.grid.ax),
      LW_FIELD("bx", spec.grid.bx),
      LW_FIELD("ay", spec.grid.ay),
      LW_FIELD("by", spec.grid.by),
      LW_FIELD("t_final", spec.t_final),
      LW_FIELD("cfl", spec.cfl),
      LW_FIELD("dx_car", spec.dx_car),
      LW_FIELD("dy_car", spec.dy_car),
      LW_FIELD("dx_car_1d", spec.dx_car_1d),
      LW_FIELD("micro_dt", spec.micro_dt),
      LW_IFIELD("lanes", spec.lanes),
      LW_FIELD("rho_ne", spec.quadrants.ne.rho),
      LW_FIELD("rho_nw", spec.quadrants.nw.rho),
      LW_FIELD("rho_se", spec.quadrants.se.rho),
      LW_FIELD("rho_sw", spec.quadrants.sw.rho),
      LW_FIELD("u_ne", spec.quadrants.ne.u),
      LW_FIELD("u_nw", spec.quadrants.nw.u),
      LW_FIELD("u_se", spec.quadrants.se.u),
      LW_FIELD("u_sw", spec.quadrants.sw.u),
      LW_FIELD("v_ne", spec.quadrants.ne.v),
      LW_FIELD("v_nw", spec.quadrants.nw.v),
      LW_FIELD("v_se", spec.quadrants.se.v),
      LW_FIELD("v_sw", spec.quadrants.sw.v),
      LW_FIELD("left_rho", left.rho),
      LW_FIELD("left_u", left.u),
      LW_FIELD("left_v", left.v),
      LW_FIELD("right_rho", right.rho),
      LW_FIELD("right_u", right.u),
      LW_FIELD("right_v", right.v),
      LW_FIELD("xi_x", xi_x),
      LW_FIELD("xi_y", xi_y),
  };
#undef LW_FIELD
#undef LW_IFIELD
  return entries;
}

namespace detail7 {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_number(const std::string& value, const std::string& where,
                           const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
    throw ConfigError(where + ": non-numeric value '" + value + "' for key '" + key + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& value, const std::string& where,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), where, key));
  return out;
}

}  // namespace detail7

/// Applies a single `key = value` pair; `where` names the source location
/// for error messages.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value,
                          const std::string& where) {
  if (key == "scenario") {
    cfg.scenario = value;
    cfg.spec = scenarios::build_scenario(value);  // resets earlier numeric overrides
    return;
  }
  if (key == "formats") {
    cfg.write_csv = value.find("csv") != std::string::npos;
    cfg.write_pgm = value.find("pgm") != std::string::npos;
    if (!cfg.write_csv && !cfg.write_pgm)
      throw ConfigError(where + ": formats must name csv and/or pgm, got '" + value + "'");
    return;
  }
  if (key == "snapshots") {
    cfg.spec.snapshot_times = detail7::parse_list(value, where, key);
    return;
  }
  for (const SchemaEntry& e : schema()) {
    if (key != e.key) continue;
    const double v = detail7::parse_number(value, where, key);
    if (e.integral && std::abs(v - std::llround(v)) > 1e-9)
      throw ConfigError(where + ": key '" + key + "' requires an integer, got '" + value + "'");
    e.set(cfg, v);
    return;
  }
  throw ConfigError(where + ": unknown key '" + key + "'");
}

/// Validates the assembled configuration; throws ConfigError naming the
/// violated bound.
inline void validate(const RunConfig& cfg) {
  if (!(cfg.spec.cfl > 0.0) || !(cfg.spec.cfl < 1.0))
    throw ConfigError("cfl out of (0,1)");
  try {
    cfg.spec.params.validate();
    cfg.spec.grid.validate();
  } catch (const InvalidStateError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.spec.lanes < 1) throw ConfigError("lanes must be >= 1");
  if (!(cfg.spec.dx_car > 0.0) || !(cfg.spec.dy_car > 0.0) || !(cfg.spec.dx_car_1d > 0.0))
    throw ConfigError("car dimensions must be positive");
  if (!(cfg.spec.micro_dt > 0.0)) throw ConfigError("micro_dt must be positive");
  if (cfg.spec.t_final < 0.0) throw ConfigError("t_final must be >= 0");
}

/// Parses configuration text (`key = value` lines, `#` comments). Defaults:
/// the micro-macro scenario, cfl = 0.45, rho_floor = 1e-8, csv output.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail7::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
    const std::string key = detail7::trim(line.substr(0, eq));
    const std::string value = detail7::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    apply_setting(cfg, key, value, where);
  }
  validate(cfg);
  return cfg;
}

/// Applies a `--set key=value` command-line override.
inline void apply_cli_set(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  apply_setting(cfg, detail7::trim(assignment.substr(0, eq)),
                detail7::trim(assignment.substr(eq + 1)), "--set " + assignment);
}

}  // namespace lanewave::config
