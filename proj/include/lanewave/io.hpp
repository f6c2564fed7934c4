#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lanewave/errors.hpp"
#include "lanewave/fvm.hpp"
#include "lanewave/micro.hpp"
#include "lanewave/scenarios.hpp"

// Deterministic, bit-specified output files: CSV snapshots at 17 significant
// digits, key-value reports, optional PGM density heatmaps.

namespace lanewave::io {

/// 17 significant digits round-trip doubles exactly.
inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail8 {

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail8

/// Field snapshot: header `x,y,rho,rho_u,rho_v,u,v,w,sigma`, one row per
/// cell, row-major by j then i. u, v are the vacuum-regularized speeds;
/// w, sigma are the raw conserved ratios (zero in flagged vacuum).
inline void write_field_csv(const fvm::Field2D& f, const ModelParams& p,
                            const std::string& path) {
  std::ofstream out = detail8::open_out(path);
  out << "x,y,rho,rho_u,rho_v,u,v,w,sigma\n";
  for (int j = 0; j < f.grid.ny; ++j) {
    for (int i = 0; i < f.grid.nx; ++i) {
      const ConservedState& q = f.at(i, j);
      const Conversion c = conserved_to_primitive(q, p);
      const double w = c.vacuum ? 0.0 : q.rho_w / q.rho;
      const double sig = c.vacuum ? 0.0 : q.rho_sigma / q.rho;
      out << fmt17(f.grid.xc(i)) << ',' << fmt17(f.grid.yc(j)) << ',' << fmt17(q.rho)
          << ',' << fmt17(q.rho * c.state.u) << ',' << fmt17(q.rho * c.state.v) << ','
          << fmt17(c.state.u) << ',' << fmt17(c.state.v) << ',' << fmt17(w) << ','
          << fmt17(sig) << '\n';
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline void write_field1d_csv(const fvm::Field1D& f, const ModelParams& p,
                              const std::string& path) {
  std::ofstream out = detail8::open_out(path);
  out << "x,rho,rho_u,u,w\n";
  for (int i = 0; i < f.nx; ++i) {
    const ConservedState q{f.cells[i][0], f.cells[i][1], 0.0};
    const Conversion c = conserved_to_primitive(q, p);
    const double w = c.vacuum ? 0.0 : q.rho_w / q.rho;
    out << fmt17(f.xc(i)) << ',' << fmt17(q.rho) << ',' << fmt17(q.rho * c.state.u)
        << ',' << fmt17(c.state.u) << ',' << fmt17(w) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

struct FleetCsvRow {
  double t = 0.0;
  int id = 0;
  int lane = 0;
  double x = 0.0, y = 0.0, u = 0.0, v = 0.0;
  double rho_local = 0.0;
};

/// Trajectory snapshot rows: `t,id,lane,x,y,u,v,rho_local`, sorted by (t, id).
inline void write_fleet_csv(std::vector<FleetCsvRow> rows, const std::string& path) {
  std::sort(rows.begin(), rows.end(), [](const FleetCsvRow& a, const FleetCsvRow& b) {
    return (a.t != b.t) ? a.t < b.t : a.id < b.id;
  });
  std::ofstream out = detail8::open_out(path);
  out << "t,id,lane,x,y,u,v,rho_local\n";
  for (const FleetCsvRow& r : rows) {
    out << fmt17(r.t) << ',' << r.id << ',' << r.lane << ',' << fmt17(r.x) << ','
        << fmt17(r.y) << ',' << fmt17(r.u) << ',' << fmt17(r.v) << ','
        << fmt17(r.rho_local) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::vector<FleetCsvRow> fleet_rows(const micro::Fleet& fleet, double t) {
  std::vector<FleetCsvRow> rows;
  for (const micro::VehicleSample& s : micro::sample_fleet(fleet))
    rows.push_back({t, s.id, s.lane, s.x, s.y, s.u, s.v, s.rho});
  return rows;
}

/// Key-value report, one `key = value` line per entry, insertion order.
inline void write_report(const std::vector<std::pair<std::string, std::string>>& entries,
                         const std::string& path) {
  std::ofstream out = detail8::open_out(path);
  for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// 8-bit binary PGM heatmap of the density, rho in [0, rho_max] mapped
/// linearly to [0, 255]; top image row is the north edge of the road.
inline void write_field_pgm(const fvm::Field2D& f, const ModelParams& p,
                            const std::string& path) {
  std::ofstream out = detail8::open_out(path, true);
  out << "P5\n" << f.grid.nx << ' ' << f.grid.ny << "\n255\n";
  for (int j = f.grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < f.grid.nx; ++i) {
      const double s = std::clamp(f.at(i, j).rho / p.rho_max, 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(s * 255.0))));
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// Reference trajectory file: UTF-8 CSV, header `t,id,x,y,u,v`, rows sorted
/// by (t, id).
inline std::vector<scenarios::TrajectoryRow> read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path + "': empty trajectory file");
  if (line.back() == '\r') line.pop_back();
  if (line != "t,id,x,y,u,v")
    throw ConfigError("'" + path + "': expected header 't,id,x,y,u,v', got '" + line + "'");
  std::vector<scenarios::TrajectoryRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      vals.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str())
        throw ConfigError("'" + path + "' line " + std::to_string(line_no) +
                          ": non-numeric cell '" + cell + "'");
    }
    if (vals.size() != 6)
      throw ConfigError("'" + path + "' line " + std::to_string(line_no) +
                        ": expected 6 columns");
    rows.push_back({vals[0], static_cast<int>(std::llround(vals[1])), vals[2], vals[3],
                    vals[4], vals[5]});
  }
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const bool ordered = rows[k - 1].t < rows[k].t ||
                         (rows[k - 1].t == rows[k].t && rows[k - 1].id < rows[k].id);
    if (!ordered)
      throw ConfigError("'" + path + "': rows must be sorted by (t, id)");
  }
  return rows;
}

/// Generic numeric CSV reader (used by tests and the compare pipeline).
struct CsvTable {
  std::string header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  CsvTable t;
  if (!std::getline(in, t.header)) throw IoError("'" + path + "': empty file");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    t.rows.push_back(std::move(vals));
  }
  return t;
}

}  // namespace lanewave::io
