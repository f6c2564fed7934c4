#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lanewave/core.hpp"
#include "lanewave/errors.hpp"
#include "lanewave/fvm.hpp"
#include "lanewave/micro.hpp"

// The built-in experiments: the micro-macro four-state Riemann problem with
// its four-lane fleet placement, the two overtaking scenarios, the 1D
// comparison case, and the micro-vs-macro / trajectory comparison metrics.

namespace lanewave::scenarios {

struct QuadrantStates {
  PrimitiveState ne, nw, se, sw;  ///< about x = 0, y = road_width / 2
};

struct ScenarioSpec {
  std::string name;
  ModelParams params;
  fvm::Grid2D grid;
  fvm::BcX bc_x = fvm::BcX::outflow;
  double t_final = 0.0;
  std::vector<double> snapshot_times;
  QuadrantStates quadrants;
  double cfl = 0.45;

  // particle-model settings
  double dx_car = 0.005;     ///< vehicle length, 2D fleet
  double dy_car = 0.000375;  ///< vehicle width, 2D fleet
  int lanes = 4;
  double micro_dt = 1e-3;
  double dx_car_1d = 5e-4;   ///< vehicle length, 1D comparison fleet

  double road_width() const { return grid.by - grid.ay; }
};

/// The experiments with their published parameter sets. All share
/// road width 0.012, rho_max = 1, U_ref = 1, V_ref = 0.009,
/// gamma1 = gamma2 = 1 and a 200x32 grid with the jump at x = 0.
inline ScenarioSpec build_scenario(const std::string& name) {
  ScenarioSpec s;
  s.name = name;
  s.grid = fvm::Grid2D{200, 32, -0.5, 0.5, 0.0, 0.012};
  if (name == "micro-macro") {
    s.t_final = 0.1;
    s.snapshot_times = {0.1};
    s.quadrants.ne = {0.05, 0.8, -0.001};
    s.quadrants.nw = {0.05, 0.05, -0.001};
    s.quadrants.se = {0.05, 0.8, 0.001};
    s.quadrants.sw = {0.05, 0.05, 0.001};
  } else if (name == "overtake-left") {
    s.t_final = 1.5;
    s.snapshot_times = {0.5, 1.0, 1.5};
    s.quadrants.ne = {0.05, 0.8, 0.0};
    s.quadrants.nw = {0.4, 0.8, 0.0};
    s.quadrants.se = {0.4, 0.35, 0.0};
    s.quadrants.sw = {0.6, 0.65, 0.04};
  } else if (name == "overtake-right") {
    s.t_final = 1.5;
    s.snapshot_times = {0.5, 1.0, 1.5};
    s.quadrants.ne = {0.9, 0.1, 0.0};
    s.quadrants.nw = {0.7, 0.7, 0.0};
    s.quadrants.se = {0.05, 1.0, 0.0};
    s.quadrants.sw = {0.05, 1.0, 0.0};
  } else if (name == "arz1d-vs-ftl1d") {
    // 1D regression case: the x-profile of the micro-macro datum
    s.t_final = 0.1;
    s.snapshot_times = {0.1};
    s.quadrants.ne = {0.05, 0.8, 0.0};
    s.quadrants.nw = {0.05, 0.05, 0.0};
    s.quadrants.se = s.quadrants.ne;
    s.quadrants.sw = s.quadrants.nw;
  } else if (name == "custom") {
    // starts from the micro-macro layout; fields are meant to be overridden
    s = build_scenario("micro-macro");
    s.name = "custom";
  } else {
    throw ConfigError("unknown scenario '" + name + "'");
  }
  return s;
}

/// Cell-centered quadrant initial data (east is x >= 0, north is
/// y >= road_width / 2).
inline fvm::Field2D initial_field(const ScenarioSpec& s) {
  s.grid.validate();
  fvm::Field2D f;
  f.grid = s.grid;
  f.bc_x = s.bc_x;
  f.cells.resize(static_cast<std::size_t>(s.grid.nx) * s.grid.ny);
  const double ymid = s.grid.ay + 0.5 * s.road_width();
  for (int j = 0; j < s.grid.ny; ++j) {
    const bool north = s.grid.yc(j) >= ymid;
    for (int i = 0; i < s.grid.nx; ++i) {
      const bool east = s.grid.xc(i) >= 0.0;
      const PrimitiveState& q =
          east ? (north ? s.quadrants.ne : s.quadrants.se)
               : (north ? s.quadrants.nw : s.quadrants.sw);
      f.at(i, j) = primitive_to_conserved(q, s.params);
    }
  }
  return f;
}

/// 1D initial data from the x-profile of the quadrants (south row).
inline fvm::Field1D initial_field_1d(const ScenarioSpec& s, int nx = 0) {
  fvm::Field1D f;
  f.nx = (nx > 0) ? nx : s.grid.nx;
  f.ax = s.grid.ax;
  f.bx = s.grid.bx;
  f.cells.resize(f.nx);
  for (int i = 0; i < f.nx; ++i) {
    const PrimitiveState& q = (f.xc(i) >= 0.0) ? s.quadrants.se : s.quadrants.sw;
    const ConservedState c = primitive_to_conserved({q.rho, q.u, 0.0}, s.params);
    f.cells[i] = {c.rho, c.rho_w};
  }
  return f;
}

/// Four-lane fleet placement. Lanes sit at the centers of four equal bands;
/// lanes 1 and 3 start at the left domain edge, lanes 2 and 4 lead them by
/// the gap d that makes the local density around every car equal to the
/// scenario density; same-lane spacing is 2d. Longitudinal speeds follow
/// the sign of x (x <= 0 slow), lateral speeds are +v in lanes 1-2 and -v
/// in lanes 3-4. A ghost car ahead of lane 3 serves the fleet heads of
/// lanes 2 and 4 and is re-pinned to the last lane-3 car every step.
inline micro::Fleet place_fleet_four_lanes(const ScenarioSpec& s) {
  if (s.lanes != 4)
    throw InvalidStateError("invalid state: the four-lane placement needs lanes = 4");
  const double rho0 = s.quadrants.ne.rho;
  if (!(rho0 > 0.0)) throw InvalidStateError("invalid state: placement needs rho > 0");

  micro::Fleet fleet;
  fleet.dx_car = s.dx_car;
  fleet.dy_car = s.dy_car;
  fleet.road_width = s.road_width();
  fleet.ghost_policy = micro::GhostPolicy::mirror_lane;
  fleet.ghost_source_lane = 3;

  const double lane_gap = s.road_width() / s.lanes;
  const double d = s.dx_car * s.dy_car / (rho0 * lane_gap);
  const double length = s.grid.bx - s.grid.ax;
  const int per_lane = static_cast<int>(std::floor(length / (2.0 * d) + 1e-9));
  if (per_lane < 1)
    throw InvalidStateError("invalid state: domain too short for the fleet spacing");

  const double u_slow = s.quadrants.nw.u;
  const double u_fast = s.quadrants.ne.u;
  const double v_south = s.quadrants.sw.v;
  const double v_north = s.quadrants.nw.v;

  int id = 0;
  for (int lane = 1; lane <= 4; ++lane) {
    const double y = s.grid.ay + (lane - 0.5) * lane_gap;
    const double offset = (lane % 2 == 0) ? d : 0.0;  // lanes 2 and 4 lead
    const double v = (lane <= 2) ? v_south : v_north;
    for (int k = 0; k < per_lane; ++k) {
      const double x = s.grid.ax + offset + 2.0 * d * k;
      const double u = (x <= 0.0) ? u_slow : u_fast;
      fleet.vehicles.push_back({id++, lane, x, y, u, v});
    }
  }

  // ghost car at the head of lane 3, one spacing ahead of its last car
  const double x_ghost = s.grid.ax + 2.0 * d * per_lane;
  const double y3 = s.grid.ay + 2.5 * lane_gap;
  const double u_ghost = (x_ghost <= 0.0) ? u_slow : u_fast;
  fleet.vehicles.push_back({id, 3, x_ghost, y3, u_ghost, v_north});
  fleet.ghost_index = static_cast<int>(fleet.vehicles.size()) - 1;
  fleet.ghost_offset = 2.0 * d;
  return fleet;
}

/// Evenly spaced 1D fleet reproducing the scenario density, speeds by the
/// sign of the initial position.
inline micro::Fleet1D place_fleet_1d(const ScenarioSpec& s, double dx_car = 0.0) {
  micro::Fleet1D f;
  f.dx_car = (dx_car > 0.0) ? dx_car : s.dx_car_1d;
  const double rho0 = s.quadrants.ne.rho;
  const double gap = f.dx_car / rho0;
  const int n = static_cast<int>(std::floor((s.grid.bx - s.grid.ax) / gap + 1e-9)) + 1;
  for (int k = 0; k < n; ++k) {
    const double x = s.grid.ax + gap * k;
    f.x.push_back(x);
    f.u.push_back((x <= 0.0) ? s.quadrants.nw.u : s.quadrants.ne.u);
  }
  return f;
}

/// Advances a fleet to t_final in uniform explicit-Euler steps of size at
/// most dt, landing exactly on t_final.
inline micro::Fleet advance_fleet(micro::Fleet fleet, double t_final, double dt,
                                  const micro::MicroParams& mp,
                                  micro::MicroStepStats* stats = nullptr) {
  if (!(t_final >= 0.0) || !(dt > 0.0))
    throw InvalidStateError("invalid state: advance_fleet needs t_final >= 0, dt > 0");
  const long n = std::max<long>(1, std::lround(std::ceil(t_final / dt - 1e-12)));
  const double h = t_final / static_cast<double>(n);
  for (long k = 0; k < n; ++k) fleet = micro::micro_step(fleet, h, mp, stats);
  return fleet;
}

// --- comparison metrics ------------------------------------------------------

struct ComparisonReport {
  double l1_density = 0.0;    ///< relative L1 over vehicles
  double linf_density = 0.0;  ///< relative Linf over vehicles
  double l1_flux_x = 0.0;
  double l1_flux_y = 0.0;
  int vehicles_compared = 0;
  int vehicles_excluded = 0;  ///< outside the domain or without a partner
  long floor_events = 0;      ///< copied from the macro run by the caller
  long u_clamp_events = 0;
  double runtime_seconds = 0.0;
};

namespace detail6 {

// bilinear interpolation over cell centers, constant beyond the outermost
struct CellInterpolant {
  const fvm::Grid2D& grid;
  const std::vector<double>& values;  // j * nx + i

  double operator()(double x, double y) const {
    const double gx = (x - grid.ax) / grid.dx() - 0.5;
    const double gy = (y - grid.ay) / grid.dy() - 0.5;
    const int i0 = std::clamp(static_cast<int>(std::floor(gx)), 0, grid.nx - 2);
    const int j0 = std::clamp(static_cast<int>(std::floor(gy)), 0, grid.ny - 2);
    const double tx = std::clamp(gx - i0, 0.0, 1.0);
    const double ty = std::clamp(gy - j0, 0.0, 1.0);
    const auto v = [&](int i, int j) {
      return values[static_cast<std::size_t>(j) * grid.nx + i];
    };
    return (1.0 - tx) * (1.0 - ty) * v(i0, j0) + tx * (1.0 - ty) * v(i0 + 1, j0) +
           (1.0 - tx) * ty * v(i0, j0 + 1) + tx * ty * v(i0 + 1, j0 + 1);
  }
};

}  // namespace detail6

/// Relative L1/Linf discrepancies between the per-vehicle particle fields
/// (rho_i, rho_i u_i, rho_i v_i) and the macroscopic fields bilinearly
/// interpolated to the vehicle positions.
inline ComparisonReport compare_micro_macro(const micro::Fleet& fleet,
                                            const fvm::Field2D& field,
                                            const ModelParams& p) {
  const auto& g = field.grid;
  std::vector<double> rho(field.cells.size()), fx(field.cells.size()),
      fy(field.cells.size());
  for (std::size_t k = 0; k < field.cells.size(); ++k) {
    const Conversion c = conserved_to_primitive(field.cells[k], p);
    rho[k] = field.cells[k].rho;
    fx[k] = field.cells[k].rho * c.state.u;
    fy[k] = field.cells[k].rho * c.state.v;
  }
  const detail6::CellInterpolant irho{g, rho};
  const detail6::CellInterpolant ifx{g, fx};
  const detail6::CellInterpolant ify{g, fy};

  ComparisonReport r;
  double sum_drho = 0.0, sum_rho = 0.0, max_drho = 0.0, max_rho = 0.0;
  double sum_dfx = 0.0, sum_fx = 0.0, sum_dfy = 0.0, sum_fy = 0.0;
  for (const micro::VehicleSample& s : micro::sample_fleet(fleet)) {
    if (!s.has_partner || s.x < g.ax || s.x > g.bx || s.y < g.ay || s.y > g.by) {
      ++r.vehicles_excluded;
      continue;
    }
    ++r.vehicles_compared;
    const double mrho = irho(s.x, s.y);
    const double mfx = ifx(s.x, s.y);
    const double mfy = ify(s.x, s.y);
    sum_drho += std::abs(s.rho - mrho);
    sum_rho += std::abs(mrho);
    max_drho = std::max(max_drho, std::abs(s.rho - mrho));
    max_rho = std::max(max_rho, std::abs(mrho));
    sum_dfx += std::abs(s.rho * s.u - mfx);
    sum_fx += std::abs(mfx);
    sum_dfy += std::abs(s.rho * s.v - mfy);
    sum_fy += std::abs(mfy);
  }
  if (r.vehicles_compared == 0)
    throw InvalidStateError("invalid state: no vehicles available for comparison");
  r.l1_density = sum_drho / sum_rho;
  r.linf_density = max_drho / max_rho;
  r.l1_flux_x = (sum_fx > 0.0) ? sum_dfx / sum_fx : 0.0;
  r.l1_flux_y = (sum_fy > 0.0) ? sum_dfy / sum_fy : 0.0;
  return r;
}

/// Relative L1 discrepancy between the 1D per-car densities and the 1D grid
/// density linearly interpolated to the car positions.
inline double compare_ftl1d_arz1d(const micro::Fleet1D& fleet, const fvm::Field1D& field) {
  if (fleet.x.size() < 2) throw InvalidStateError("invalid state: 1D fleet too small");
  auto interp = [&](double x) {
    const double gx = (x - field.ax) / field.dx() - 0.5;
    const int i0 = std::clamp(static_cast<int>(std::floor(gx)), 0, field.nx - 2);
    const double t = std::clamp(gx - i0, 0.0, 1.0);
    return (1.0 - t) * field.cells[i0][0] + t * field.cells[i0 + 1][0];
  };
  double sum_diff = 0.0, sum_ref = 0.0;
  for (std::size_t i = 0; i + 1 < fleet.x.size(); ++i) {
    if (fleet.x[i] < field.ax || fleet.x[i] > field.bx) continue;
    const double rho_car = micro::local_density_1d(i, fleet);
    const double rho_grid = interp(fleet.x[i]);
    sum_diff += std::abs(rho_car - rho_grid);
    sum_ref += std::abs(rho_grid);
  }
  if (sum_ref == 0.0) throw InvalidStateError("invalid state: empty comparison range");
  return sum_diff / sum_ref;
}

// --- trajectory comparison ---------------------------------------------------

/// One reference or simulated trajectory record.
struct TrajectoryRow {
  double t = 0.0;
  int id = 0;
  double x = 0.0, y = 0.0, u = 0.0, v = 0.0;
};

struct TrajectoryError {
  double t = 0.0;
  int id = 0;
  double error = 0.0;  ///< 2-norm position error
};

/// Per-car position errors at the common snapshot times of a simulated and
/// a reference series. Ids present on one side but not the other at a
/// shared time are an error, listing the offenders.
inline std::vector<TrajectoryError> compare_trajectories(
    const std::vector<TrajectoryRow>& sim, const std::vector<TrajectoryRow>& ref) {
  const double ttol = 1e-9;
  std::vector<TrajectoryError> out;
  std::set<int> offenders;
  for (const TrajectoryRow& s : sim) {
    bool time_seen = false;
    bool matched = false;
    for (const TrajectoryRow& r : ref) {
      if (std::abs(r.t - s.t) > ttol) continue;
      time_seen = true;
      if (r.id != s.id) continue;
      out.push_back({s.t, s.id, std::hypot(s.x - r.x, s.y - r.y)});
      matched = true;
      break;
    }
    if (time_seen && !matched) offenders.insert(s.id);
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "trajectory id mismatch, offenders:";
    for (int id : offenders) msg << ' ' << id;
    throw InvalidStateError(msg.str());
  }
  std::sort(out.begin(), out.end(), [](const TrajectoryError& a, const TrajectoryError& b) {
    return (a.t != b.t) ? a.t < b.t : a.id < b.id;
  });
  return out;
}

/// Runs the 2D particle model from the first reference snapshot, pinning the
/// right-most vehicle to its reference trajectory (linearly interpolated in
/// time) at every sub-step; returns simulated rows at the reference times.
inline std::vector<TrajectoryRow> simulate_with_reference_leader(
    const std::vector<TrajectoryRow>& ref, const ModelParams& model, double dx_car,
    double dy_car, double road_width, double dt) {
  if (ref.empty()) throw InvalidStateError("invalid state: empty reference trajectory");
  std::vector<double> times;
  for (const TrajectoryRow& r : ref)
    if (times.empty() || r.t > times.back() + 1e-12) times.push_back(r.t);
  if (times.size() < 2)
    throw InvalidStateError("invalid state: reference needs at least two times");

  micro::Fleet fleet;
  fleet.dx_car = dx_car;
  fleet.dy_car = dy_car;
  fleet.road_width = road_width;
  for (const TrajectoryRow& r : ref)
    if (std::abs(r.t - times.front()) <= 1e-12)
      fleet.vehicles.push_back({r.id, 0, r.x, r.y, r.u, r.v});
  if (fleet.vehicles.empty())
    throw InvalidStateError("invalid state: no vehicles at the initial reference time");

  // the right-most initial vehicle acts as the data-driven boundary car
  std::size_t leader = 0;
  for (std::size_t i = 1; i < fleet.vehicles.size(); ++i)
    if (fleet.vehicles[i].x > fleet.vehicles[leader].x) leader = i;
  fleet.ghost_index = static_cast<int>(leader);
  const int leader_id = fleet.vehicles[leader].id;

  auto leader_state = [&](double t) -> TrajectoryRow {
    const TrajectoryRow* lo = nullptr;
    const TrajectoryRow* hi = nullptr;
    for (const TrajectoryRow& r : ref) {
      if (r.id != leader_id) continue;
      if (r.t <= t + 1e-12 && (lo == nullptr || r.t > lo->t)) lo = &r;
      if (r.t >= t - 1e-12 && (hi == nullptr || r.t < hi->t)) hi = &r;
    }
    if (lo == nullptr || hi == nullptr)
      throw InvalidStateError("invalid state: leader missing from the reference");
    if (hi->t <= lo->t + 1e-12) return *lo;
    const double a = (t - lo->t) / (hi->t - lo->t);
    TrajectoryRow r = *lo;
    r.x = lo->x + a * (hi->x - lo->x);
    r.y = lo->y + a * (hi->y - lo->y);
    r.u = lo->u + a * (hi->u - lo->u);
    r.v = lo->v + a * (hi->v - lo->v);
    return r;
  };

  const auto mp = micro::MicroParams::make(model, dx_car, dy_car);
  std::vector<TrajectoryRow> out;
  auto emit = [&](double t) {
    for (const micro::Vehicle& c : fleet.vehicles)
      out.push_back({t, c.id, c.x, c.y, c.u, c.v});
  };
  emit(times.front());
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double span = times[k + 1] - times[k];
    const int nsub = std::max(1, static_cast<int>(std::ceil(span / dt)));
    const double h = span / nsub;
    for (int m = 0; m < nsub; ++m) {
      fleet = micro::micro_step(fleet, h, mp);
      const TrajectoryRow r = leader_state(times[k] + (m + 1) * h);
      micro::Vehicle& g = fleet.vehicles[static_cast<std::size_t>(fleet.ghost_index)];
      g.x = r.x;
      g.y = r.y;
      g.u = r.u;
      g.v = r.v;
    }
    emit(times[k + 1]);
  }
  return out;
}

}  // namespace lanewave::scenarios
