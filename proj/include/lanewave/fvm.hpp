#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lanewave/core.hpp"
#include "lanewave/errors.hpp"

// First-order finite-volume solvers for the 1D and 2D second-order systems
// with local Lax-Friedrichs fluxes, CFL time stepping and boundary handling.

namespace lanewave::fvm {

struct Grid2D {
  int nx = 1, ny = 1;
  double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0;

  double dx() const { return (bx - ax) / nx; }
  double dy() const { return (by - ay) / ny; }
  double xc(int i) const { return ax + (i + 0.5) * dx(); }
  double yc(int j) const { return ay + (j + 0.5) * dy(); }

  void validate() const {
    if (nx < 1 || ny < 1) throw InvalidStateError("invalid state: grid needs nx, ny >= 1");
    if (!(bx > ax) || !(by > ay))
      throw InvalidStateError("invalid state: grid extents must be increasing");
  }
};

enum class BcX { outflow, periodic };
enum class BcY { wall };

struct Field2D {
  Grid2D grid;
  BcX bc_x = BcX::outflow;
  BcY bc_y = BcY::wall;
  std::vector<ConservedState> cells;  ///< row-major, index j * nx + i

  ConservedState& at(int i, int j) { return cells[static_cast<std::size_t>(j) * grid.nx + i]; }
  const ConservedState& at(int i, int j) const {
    return cells[static_cast<std::size_t>(j) * grid.nx + i];
  }

  static Field2D uniform(const Grid2D& g, const ConservedState& q,
                         BcX bcx = BcX::outflow) {
    g.validate();
    Field2D f;
    f.grid = g;
    f.bc_x = bcx;
    f.cells.assign(static_cast<std::size_t>(g.nx) * g.ny, q);
    return f;
  }
};

/// 1D field of (rho, rho w) cells; the x-restriction of the 2D solver.
struct Field1D {
  int nx = 1;
  double ax = 0.0, bx = 1.0;
  BcX bc_x = BcX::outflow;
  std::vector<std::array<double, 2>> cells;

  double dx() const { return (bx - ax) / nx; }
  double xc(int i) const { return ax + (i + 0.5) * dx(); }
};

// --- flux machinery ---------------------------------------------------------

namespace detail3 {

struct CellCache {
  ConservedState q;
  PrimitiveState w;
  Flux fx{};  ///< u * q
  Flux fy{};  ///< v * q
  double alpha_x = 0.0;
  double alpha_y = 0.0;
  bool u_clamped = false;
};

inline CellCache analyze(const ConservedState& q, const ModelParams& p) {
  CellCache c;
  c.q = q;
  const Conversion conv = conserved_to_primitive(q, p);
  c.w = conv.state;
  c.u_clamped = conv.u_clamped;
  const double u = conv.vacuum ? 0.0 : c.w.u;
  const double v = conv.vacuum ? 0.0 : c.w.v;
  c.fx = Flux{u * q.rho, u * q.rho_w, u * q.rho_sigma};
  c.fy = Flux{v * q.rho, v * q.rho_w, v * q.rho_sigma};
  const auto lx = eigenvalues(c.w, Direction::unit_x(), p);
  const auto ly = eigenvalues(c.w, Direction::unit_y(), p);
  c.alpha_x = detail::max3(std::abs(lx[0]), std::abs(lx[1]), std::abs(lx[2]));
  c.alpha_y = detail::max3(std::abs(ly[0]), std::abs(ly[1]), std::abs(ly[2]));
  return c;
}

inline Flux llf(const CellCache& l, const CellCache& r, Axis axis) {
  const Flux& a = (axis == Axis::x) ? l.fx : l.fy;
  const Flux& b = (axis == Axis::x) ? r.fx : r.fy;
  const double alpha = (axis == Axis::x) ? std::max(l.alpha_x, r.alpha_x)
                                         : std::max(l.alpha_y, r.alpha_y);
  Flux f;
  f[0] = 0.5 * (a[0] + b[0]) - 0.5 * alpha * (r.q.rho - l.q.rho);
  f[1] = 0.5 * (a[1] + b[1]) - 0.5 * alpha * (r.q.rho_w - l.q.rho_w);
  f[2] = 0.5 * (a[2] + b[2]) - 0.5 * alpha * (r.q.rho_sigma - l.q.rho_sigma);
  return f;
}

}  // namespace detail3

/// Local Lax-Friedrichs flux
///   F = 1/2 (f(QL) + f(QR)) - 1/2 alpha (QR - QL)
/// with alpha the largest absolute wave speed of the two states along the
/// axis. For QL = QR this reduces to the physical flux exactly.
inline Flux llf_flux(const ConservedState& ql, const ConservedState& qr, Axis axis,
                     const ModelParams& p) {
  return detail3::llf(detail3::analyze(ql, p), detail3::analyze(qr, p), axis);
}

struct StepStats {
  long floor_events = 0;  ///< cells whose density undershot rho_floor
  long u_clamps = 0;      ///< cells whose recovered u was clamped to zero
};

struct WaveSpeedBounds {
  double alpha_x = 0.0;
  double alpha_y = 0.0;
};

inline WaveSpeedBounds max_wave_speeds(const Field2D& f, const ModelParams& p) {
  WaveSpeedBounds b;
  for (const ConservedState& q : f.cells) {
    const auto c = detail3::analyze(q, p);
    b.alpha_x = std::max(b.alpha_x, c.alpha_x);
    b.alpha_y = std::max(b.alpha_y, c.alpha_y);
  }
  return b;
}

/// Largest explicit-Euler step admitted by the grid and current wave speeds.
/// A field whose speeds do not exceed the vacuum-floor regularization scale
/// counts as motionless and falls back to a geometric step.
inline double max_stable_dt(const Field2D& f, const ModelParams& p) {
  const WaveSpeedBounds b = max_wave_speeds(f, p);
  const double ax0 = rho_dpressure(p.rho_floor, std::abs(p.u_ref), p.gamma1);
  const double ay0 = rho_dpressure(p.rho_floor, std::abs(p.v_ref), p.gamma2);
  if (b.alpha_x <= ax0 * (1.0 + 1e-12) && b.alpha_y <= ay0 * (1.0 + 1e-12))
    return std::min(f.grid.dx(), f.grid.dy()) / p.u_ref;
  return 1.0 / (b.alpha_x / f.grid.dx() + b.alpha_y / f.grid.dy());
}

/// dt = cfl / (max alpha_x / dx + max alpha_y / dy), falling back to
/// cfl * min(dx, dy) / u_ref when all wave speeds vanish.
inline double cfl_dt(const Field2D& f, double cfl, const ModelParams& p) {
  if (!(cfl > 0.0) || !(cfl < 1.0))
    throw InvalidStateError("invalid state: cfl out of (0,1)");
  return cfl * max_stable_dt(f, p);
}

/// Ghost-extended view of a field in x: zero-gradient (outflow) copies the
/// boundary column, periodic wraps. y has no ghosts; the wall condition is a
/// zero lateral flux through the j = -1/2 and j = ny - 1/2 edges.
struct GhostView {
  const Field2D& field;

  const ConservedState& cell(int i, int j) const {
    const int nx = field.grid.nx;
    if (i < 0) i = (field.bc_x == BcX::periodic) ? nx - 1 : 0;
    if (i >= nx) i = (field.bc_x == BcX::periodic) ? 0 : nx - 1;
    return field.at(i, j);
  }
};

inline GhostView apply_boundaries(const Field2D& f) { return GhostView{f}; }

/// One step of the first-order scheme
///   Q(n+1) = Q(n) - dt/dx (F_{i+1/2,j} - F_{i-1/2,j})
///                 - dt/dy (G_{i,j+1/2} - G_{i,j-1/2})
/// with piecewise-constant reconstruction and LLF fluxes. dt must respect
/// the stability bound. Cells below rho_floor are counted as floor events
/// and treated as vacuum by the conversions, but their conserved content is
/// not rewritten: the update stays in divergence form, so the totals are
/// conserved to rounding. The LLF dissipation keeps rho positive under the
/// stability bound.
inline Field2D step_2d(const Field2D& f, double dt, const ModelParams& p,
                       StepStats* stats = nullptr) {
  f.grid.validate();
  if (!(dt > 0.0)) throw InvalidStateError("invalid state: dt must be > 0");
  if (dt > max_stable_dt(f, p) * (1.0 + 1e-12))
    throw InvalidStateError("invalid state: dt exceeds the CFL stability bound");

  const int nx = f.grid.nx;
  const int ny = f.grid.ny;
  const double rx = dt / f.grid.dx();
  const double ry = dt / f.grid.dy();

  std::vector<detail3::CellCache> cache(f.cells.size());
  for (std::size_t k = 0; k < f.cells.size(); ++k) {
    cache[k] = detail3::analyze(f.cells[k], p);
    if (stats != nullptr && cache[k].u_clamped) ++stats->u_clamps;
  }
  const auto cat = [&](int i, int j) -> const detail3::CellCache& {
    return cache[static_cast<std::size_t>(j) * nx + i];
  };

  Field2D out = f;

  // x sweep, row by row
  std::vector<Flux> edge(static_cast<std::size_t>(nx) + 1);
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) edge[i] = detail3::llf(cat(i - 1, j), cat(i, j), Axis::x);
    if (f.bc_x == BcX::periodic) {
      edge[0] = detail3::llf(cat(nx - 1, j), cat(0, j), Axis::x);
      edge[nx] = edge[0];
    } else {
      edge[0] = cat(0, j).fx;        // equal-state LLF reduces to f(Q)
      edge[nx] = cat(nx - 1, j).fx;
    }
    for (int i = 0; i < nx; ++i) {
      ConservedState& q = out.at(i, j);
      q.rho -= rx * (edge[i + 1][0] - edge[i][0]);
      q.rho_w -= rx * (edge[i + 1][1] - edge[i][1]);
      q.rho_sigma -= rx * (edge[i + 1][2] - edge[i][2]);
    }
  }

  // y sweep, column by column; wall edges carry zero flux
  std::vector<Flux> yedge(static_cast<std::size_t>(ny) + 1);
  for (int i = 0; i < nx; ++i) {
    yedge[0] = Flux{0.0, 0.0, 0.0};
    yedge[ny] = Flux{0.0, 0.0, 0.0};
    for (int j = 1; j < ny; ++j) yedge[j] = detail3::llf(cat(i, j - 1), cat(i, j), Axis::y);
    for (int j = 0; j < ny; ++j) {
      ConservedState& q = out.at(i, j);
      q.rho -= ry * (yedge[j + 1][0] - yedge[j][0]);
      q.rho_w -= ry * (yedge[j + 1][1] - yedge[j][1]);
      q.rho_sigma -= ry * (yedge[j + 1][2] - yedge[j][2]);
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      ConservedState& q = out.at(i, j);
      if (!std::isfinite(q.rho) || !std::isfinite(q.rho_w) || !std::isfinite(q.rho_sigma))
        throw NumericalError("numerical failure: non-finite state in cell (" +
                             std::to_string(i) + ", " + std::to_string(j) + ")");
      if (q.rho < p.rho_floor && stats != nullptr) ++stats->floor_events;
    }
  }
  return out;
}

// --- 1D restriction ---------------------------------------------------------

namespace detail3 {

inline ConservedState promote(const std::array<double, 2>& c) {
  return ConservedState{c[0], c[1], 0.0};
}

}  // namespace detail3

inline double max_stable_dt_1d(const Field1D& f, const ModelParams& p) {
  double alpha = 0.0;
  for (const auto& c : f.cells)
    alpha = std::max(alpha, detail3::analyze(detail3::promote(c), p).alpha_x);
  const double ax0 = rho_dpressure(p.rho_floor, std::abs(p.u_ref), p.gamma1);
  if (alpha <= ax0 * (1.0 + 1e-12)) return f.dx() / p.u_ref;
  return f.dx() / alpha;
}

inline double cfl_dt_1d(const Field1D& f, double cfl, const ModelParams& p) {
  if (!(cfl > 0.0) || !(cfl < 1.0))
    throw InvalidStateError("invalid state: cfl out of (0,1)");
  return cfl * max_stable_dt_1d(f, p);
}

/// The 2D scheme restricted to x, acting on (rho, rho w) cells. Arithmetic
/// is shared with step_2d so y-uniform 2D runs with V_ref = 0 reproduce it
/// row by row exactly.
inline Field1D step_1d(const Field1D& f, double dt, const ModelParams& p,
                       StepStats* stats = nullptr) {
  if (f.nx < 1 || static_cast<int>(f.cells.size()) != f.nx)
    throw InvalidStateError("invalid state: malformed 1D field");
  if (!(dt > 0.0)) throw InvalidStateError("invalid state: dt must be > 0");
  if (dt > max_stable_dt_1d(f, p) * (1.0 + 1e-12))
    throw InvalidStateError("invalid state: dt exceeds the CFL stability bound");

  const int nx = f.nx;
  const double rx = dt / f.dx();
  std::vector<detail3::CellCache> cache(f.cells.size());
  for (int i = 0; i < nx; ++i) {
    cache[i] = detail3::analyze(detail3::promote(f.cells[i]), p);
    if (stats != nullptr && cache[i].u_clamped) ++stats->u_clamps;
  }

  std::vector<Flux> edge(static_cast<std::size_t>(nx) + 1);
  for (int i = 1; i < nx; ++i) edge[i] = detail3::llf(cache[i - 1], cache[i], Axis::x);
  if (f.bc_x == BcX::periodic) {
    edge[0] = detail3::llf(cache[nx - 1], cache[0], Axis::x);
    edge[nx] = edge[0];
  } else {
    edge[0] = cache[0].fx;
    edge[nx] = cache[nx - 1].fx;
  }

  Field1D out = f;
  for (int i = 0; i < nx; ++i) {
    auto& c = out.cells[i];
    c[0] -= rx * (edge[i + 1][0] - edge[i][0]);
    c[1] -= rx * (edge[i + 1][1] - edge[i][1]);
    if (!std::isfinite(c[0]) || !std::isfinite(c[1]))
      throw NumericalError("numerical failure: non-finite state in cell (" +
                           std::to_string(i) + ")");
    if (c[0] < p.rho_floor && stats != nullptr) ++stats->floor_events;
  }
  return out;
}

// --- time integration -------------------------------------------------------

struct Totals {
  double mass = 0.0;       ///< sum rho dx dy
  double momentum_w = 0.0; ///< sum rho w dx dy
  double momentum_s = 0.0; ///< sum rho sigma dx dy
};

inline Totals totals(const Field2D& f) {
  Totals t;
  for (const ConservedState& q : f.cells) {
    t.mass += q.rho;
    t.momentum_w += q.rho_w;
    t.momentum_s += q.rho_sigma;
  }
  const double dv = f.grid.dx() * f.grid.dy();
  t.mass *= dv;
  t.momentum_w *= dv;
  t.momentum_s *= dv;
  return t;
}

struct Snapshot {
  double t = 0.0;
  Field2D field;
};

struct RunStats {
  long steps = 0;
  StepStats events;
};

/// Advances with cfl-sized steps, truncating so the trajectory lands exactly
/// on every snapshot time and on t_final; returns the requested snapshots
/// (t_final is always included) in time order.
inline std::vector<Snapshot> run(const Field2D& initial, double t_final, double cfl,
                                 std::vector<double> snapshot_times, const ModelParams& p,
                                 RunStats* stats = nullptr) {
  if (t_final < 0.0) throw InvalidStateError("invalid state: t_final must be >= 0");
  snapshot_times.push_back(t_final);
  std::sort(snapshot_times.begin(), snapshot_times.end());
  snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()),
                       snapshot_times.end());
  for (double s : snapshot_times)
    if (s < 0.0 || s > t_final)
      throw InvalidStateError("invalid state: snapshot time outside [0, t_final]");

  std::vector<Snapshot> out;
  Field2D f = initial;
  double t = 0.0;
  for (double target : snapshot_times) {
    if (target == 0.0) {
      out.push_back({0.0, f});
      continue;
    }
    while (t < target) {
      const double remaining = target - t;
      const double dt_cfl = cfl_dt(f, cfl, p);
      StepStats step_events;
      if (dt_cfl >= remaining) {
        f = step_2d(f, remaining, p, &step_events);
        t = target;
      } else {
        f = step_2d(f, dt_cfl, p, &step_events);
        t += dt_cfl;
      }
      if (stats != nullptr) {
        ++stats->steps;
        stats->events.floor_events += step_events.floor_events;
        stats->events.u_clamps += step_events.u_clamps;
      }
    }
    t = target;
    out.push_back({target, f});
  }
  return out;
}

struct Snapshot1D {
  double t = 0.0;
  Field1D field;
};

inline std::vector<Snapshot1D> run_1d(const Field1D& initial, double t_final, double cfl,
                                      std::vector<double> snapshot_times,
                                      const ModelParams& p, RunStats* stats = nullptr) {
  if (t_final < 0.0) throw InvalidStateError("invalid state: t_final must be >= 0");
  snapshot_times.push_back(t_final);
  std::sort(snapshot_times.begin(), snapshot_times.end());
  snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()),
                       snapshot_times.end());
  std::vector<Snapshot1D> out;
  Field1D f = initial;
  double t = 0.0;
  for (double target : snapshot_times) {
    if (target == 0.0) {
      out.push_back({0.0, f});
      continue;
    }
    while (t < target) {
      const double remaining = target - t;
      const double dt_cfl = cfl_dt_1d(f, cfl, p);
      StepStats step_events;
      if (dt_cfl >= remaining) {
        f = step_1d(f, remaining, p, &step_events);
        t = target;
      } else {
        f = step_1d(f, dt_cfl, p, &step_events);
        t += dt_cfl;
      }
      if (stats != nullptr) {
        ++stats->steps;
        stats->events.floor_events += step_events.floor_events;
        stats->events.u_clamps += step_events.u_clamps;
      }
    }
    t = target;
    out.push_back({target, f});
  }
  return out;
}

}  // namespace lanewave::fvm
