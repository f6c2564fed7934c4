#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "lanewave/core.hpp"
#include "lanewave/errors.hpp"

// 1D and 2D follow-the-leader particle models: interaction selection, local
// density, acceleration laws and explicit-Euler time stepping.

namespace lanewave::micro {

struct Vehicle {
  int id = 0;
  int lane = 0;  ///< bookkeeping only, lanes impose no constraint
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;  ///< >= 0
  double v = 0.0;  ///< signed
};

/// Rule applied to vehicles with no admissible interaction partner.
enum class GhostPolicy {
  freeze,       ///< no partner: zero acceleration, positions still advance
  mirror_lane,  ///< a dedicated ghost car shadows the head of a source lane
};

struct Fleet {
  std::vector<Vehicle> vehicles;
  double dx_car = 0.005;       ///< typical vehicle length (Delta X)
  double dy_car = 0.000375;    ///< typical vehicle width (Delta Y)
  double road_width = 0.012;   ///< y is clamped to [0, road_width]
  GhostPolicy ghost_policy = GhostPolicy::freeze;
  int ghost_index = -1;        ///< index of the ghost vehicle, or -1
  int ghost_source_lane = 0;   ///< lane whose head car the ghost mirrors
  double ghost_offset = 0.0;   ///< longitudinal lead of the ghost

  bool is_ghost(std::size_t i) const { return static_cast<int>(i) == ghost_index; }
};

/// Derived acceleration constants C1 = U_ref (DX DY)^gamma1 and
/// C2 = V_ref (DX DY)^gamma2, kept next to the car geometry they were
/// computed from so staleness is detectable.
struct MicroParams {
  ModelParams model;
  double dx_car = 0.0;
  double dy_car = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;

  static MicroParams make(const ModelParams& model, double dx_car, double dy_car) {
    if (!(dx_car > 0.0) || !(dy_car > 0.0))
      throw InvalidStateError("invalid state: car dimensions must be positive");
    MicroParams mp;
    mp.model = model;
    mp.dx_car = dx_car;
    mp.dy_car = dy_car;
    const double area = dx_car * dy_car;
    mp.c1 = model.u_ref * detail::pow_gamma(area, model.gamma1);
    mp.c2 = model.v_ref * detail::pow_gamma(area, model.gamma2);
    return mp;
  }
};

namespace detail2 {

// Minimum lateral gap as a fraction of the car width; below it the
// denominators of the density and acceleration laws are clamped.
inline constexpr double kLateralGapFraction = 1e-3;

inline void check_consistent(const Fleet& fleet, const MicroParams& mp) {
  if (fleet.dx_car != mp.dx_car || fleet.dy_car != mp.dy_car)
    throw InvalidStateError(
        "invalid state: MicroParams were built for different car dimensions");
}

}  // namespace detail2

/// Interaction partner of vehicle i: the nearest vehicle ahead on the side
/// the vehicle is steering towards (v_i (y_h - y_i) > 0). A candidate
/// counts as ahead once it leads by at least a car length; a vehicle merely
/// abreast (within one length frontally but far to the side) is not a
/// leader, and admitting it would make the clamped gap density jump
/// discontinuously when two laterally separated columns drift past each
/// other. For v_i = 0 the side condition excludes every candidate, so it is
/// dropped and the nearest vehicle ahead is used. Distance ties break on
/// the smaller id. Returns nothing when the admissible set is empty.
inline std::optional<std::size_t> select_interacting(std::size_t i, const Fleet& fleet) {
  const Vehicle& me = fleet.vehicles.at(i);
  std::optional<std::size_t> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_id = std::numeric_limits<int>::max();
  for (std::size_t h = 0; h < fleet.vehicles.size(); ++h) {
    if (h == i) continue;
    const Vehicle& other = fleet.vehicles[h];
    if (!(other.x - me.x >= fleet.dx_car)) continue;
    if (me.v != 0.0 && !(me.v * (other.y - me.y) > 0.0)) continue;
    const double dx = other.x - me.x;
    const double dy = other.y - me.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2 || (d2 == best_d2 && other.id < best_id)) {
      best = h;
      best_d2 = d2;
      best_id = other.id;
    }
  }
  return best;
}

/// Longitudinal and lateral gaps to the partner, clamped from below
/// (dx >= DX, |dy| >= DY * 1e-3) so the density and acceleration laws stay
/// finite at degenerate geometry. The lateral sign is preserved; an exactly
/// zero lateral gap counts as positive.
struct Gaps {
  double dx = 0.0;        ///< clamped, > 0
  double dy_abs = 0.0;    ///< clamped, > 0
  double dy_signed = 0.0; ///< clamped magnitude with original sign
};

inline Gaps interaction_gaps(std::size_t i, std::size_t j, const Fleet& fleet) {
  const Vehicle& a = fleet.vehicles.at(i);
  const Vehicle& b = fleet.vehicles.at(j);
  const double gx = b.x - a.x;
  if (!(gx > 0.0)) throw InvalidStateError("not ahead: interaction partner must have x_j > x_i");
  Gaps g;
  g.dx = std::max(gx, fleet.dx_car);
  const double dy = b.y - a.y;
  g.dy_abs = std::max(std::abs(dy), fleet.dy_car * detail2::kLateralGapFraction);
  g.dy_signed = std::copysign(g.dy_abs, dy);
  return g;
}

/// Local density around vehicle i with partner j:
/// rho_i = DX DY / ((x_j - x_i) |y_j - y_i|), gaps clamped as above.
inline double local_density(std::size_t i, std::size_t j, const Fleet& fleet) {
  const Gaps g = interaction_gaps(i, j, fleet);
  return fleet.dx_car * fleet.dy_car / (g.dx * g.dy_abs);
}

/// Follow-the-leader accelerations of vehicle i towards partner j:
///   du = C1 [ (u_j - u_i) / (dx dA^g1) + (v_j - v_i) / (dy dA^g1) ]
///   dv = C2 [ (u_j - u_i) / (dx dA^g2) + (v_j - v_i) / (dy dA^g2) ]
/// with dA = dx |dy|.
inline std::pair<double, double> accelerations(std::size_t i, std::size_t j,
                                               const Fleet& fleet, const MicroParams& mp) {
  detail2::check_consistent(fleet, mp);
  const Gaps g = interaction_gaps(i, j, fleet);
  const Vehicle& a = fleet.vehicles[i];
  const Vehicle& b = fleet.vehicles[j];
  const double du_rel = b.u - a.u;
  const double dv_rel = b.v - a.v;
  const double area = g.dx * g.dy_abs;
  const double a1 = detail::pow_gamma(area, mp.model.gamma1);
  const double a2 = detail::pow_gamma(area, mp.model.gamma2);
  const double du = mp.c1 * (du_rel / (g.dx * a1) + dv_rel / (g.dy_signed * a1));
  const double dv = mp.c2 * (du_rel / (g.dx * a2) + dv_rel / (g.dy_signed * a2));
  return {du, dv};
}

struct MicroStepStats {
  long u_clamps = 0;       ///< speeds that undershot zero and were clamped
  long wall_contacts = 0;  ///< vehicles clamped at a road edge (v zeroed)
  long no_partner = 0;     ///< vehicles stepped under the freeze rule
};

/// One explicit Euler step of the 2D follow-the-leader model. Partners are
/// recomputed from the time-n snapshot; all four state components update
/// simultaneously from time-n values. Under the mirror_lane policy the ghost
/// vehicle is first re-pinned to the head car of its source lane.
inline Fleet micro_step(const Fleet& fleet, double dt, const MicroParams& mp,
                        MicroStepStats* stats = nullptr) {
  if (!(dt >= 0.0)) throw InvalidStateError("invalid state: dt must be >= 0");
  detail2::check_consistent(fleet, mp);

  Fleet cur = fleet;
  if (cur.ghost_policy == GhostPolicy::mirror_lane && cur.ghost_index >= 0) {
    const Vehicle* head = nullptr;
    for (std::size_t h = 0; h < cur.vehicles.size(); ++h) {
      if (cur.is_ghost(h)) continue;
      const Vehicle& c = cur.vehicles[h];
      if (c.lane != cur.ghost_source_lane) continue;
      if (head == nullptr || c.x > head->x) head = &c;
    }
    if (head != nullptr) {
      Vehicle& g = cur.vehicles[static_cast<std::size_t>(cur.ghost_index)];
      g.x = head->x + cur.ghost_offset;
      g.y = head->y;
      g.u = head->u;
      g.v = head->v;
    }
  }

  Fleet next = cur;
  for (std::size_t i = 0; i < cur.vehicles.size(); ++i) {
    if (cur.is_ghost(i)) continue;  // the ghost is pinned, not integrated
    const Vehicle& c = cur.vehicles[i];
    double du = 0.0;
    double dv = 0.0;
    const auto partner = select_interacting(i, cur);
    if (partner.has_value()) {
      const auto acc = accelerations(i, *partner, cur, mp);
      du = acc.first;
      dv = acc.second;
    } else if (stats != nullptr) {
      ++stats->no_partner;
    }
    Vehicle& n = next.vehicles[i];
    n.x = c.x + dt * c.u;
    n.y = c.y + dt * c.v;
    n.u = c.u + dt * du;
    n.v = c.v + dt * dv;
    if (n.u < 0.0) {
      n.u = 0.0;
      if (stats != nullptr) ++stats->u_clamps;
    }
    if (n.y < 0.0 || n.y > cur.road_width) {
      n.y = std::clamp(n.y, 0.0, cur.road_width);
      n.v = 0.0;  // edge contact kills the lateral motion
      if (stats != nullptr) ++stats->wall_contacts;
    }
    if (!std::isfinite(n.x) || !std::isfinite(n.y) || !std::isfinite(n.u) ||
        !std::isfinite(n.v))
      throw NumericalError("numerical failure: non-finite vehicle state after step");
  }
  return next;
}

// ---------------------------------------------------------------------------
// 1D follow-the-leader model (positions strictly increasing, j(i) = i+1)

struct Fleet1D {
  std::vector<double> x;  ///< strictly increasing positions
  std::vector<double> u;  ///< speeds, >= 0
  double dx_car = 0.005;  ///< typical vehicle length
};

inline double local_density_1d(std::size_t i, const Fleet1D& fleet) {
  const double gap = fleet.x.at(i + 1) - fleet.x.at(i);
  if (!(gap > 0.0)) throw InvalidStateError("not ahead: 1D fleet must be ordered");
  return fleet.dx_car / std::max(gap, fleet.dx_car);
}

/// One explicit Euler step of the 1D model
///   du_i = U_ref DX^gamma (u_{i+1} - u_i) / (x_{i+1} - x_i)^{gamma+1};
/// the leader keeps its speed. Throws when the input is not ordered or the
/// step breaks the ordering (dt above the min-gap / max-speed bound).
inline Fleet1D ftl1d_step(const Fleet1D& fleet, double dt, const ModelParams& p) {
  const std::size_t n = fleet.x.size();
  if (fleet.u.size() != n) throw InvalidStateError("invalid state: 1D fleet size mismatch");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(fleet.x[i] < fleet.x[i + 1]))
      throw InvalidStateError("invalid state: 1D fleet positions must be strictly increasing");

  Fleet1D next = fleet;
  const double cgam = p.u_ref * detail::pow_gamma(fleet.dx_car, p.gamma1);
  for (std::size_t i = 0; i < n; ++i) {
    double du = 0.0;
    if (i + 1 < n) {
      const double gap = fleet.x[i + 1] - fleet.x[i];
      du = cgam * (fleet.u[i + 1] - fleet.u[i]) /
           detail::pow_gamma(gap, p.gamma1 + 1.0);
    }
    next.x[i] = fleet.x[i] + dt * fleet.u[i];
    next.u[i] = std::max(fleet.u[i] + dt * du, 0.0);
    if (!std::isfinite(next.x[i]) || !std::isfinite(next.u[i]))
      throw NumericalError("numerical failure: non-finite 1D vehicle state");
  }
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(next.x[i] < next.x[i + 1]))
      throw NumericalError(
          "numerical failure: 1D ordering lost; reduce dt below min-gap / max-speed");
  return next;
}

// ---------------------------------------------------------------------------
// Sampling the particle model onto macroscopic fields

struct VehicleSample {
  int id = 0;
  int lane = 0;
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;
  double v = 0.0;
  double rho = 0.0;  ///< local density; meaningful only when has_partner
  bool has_partner = false;
};

/// Per-vehicle (rho_i, rho_i u_i, rho_i v_i) samples for every non-ghost
/// vehicle; leaders without a partner are flagged and carry rho = 0.
inline std::vector<VehicleSample> sample_fleet(const Fleet& fleet) {
  if (fleet.vehicles.empty()) throw InvalidStateError("invalid state: empty fleet");
  std::vector<VehicleSample> out;
  out.reserve(fleet.vehicles.size());
  for (std::size_t i = 0; i < fleet.vehicles.size(); ++i) {
    if (fleet.is_ghost(i)) continue;
    const Vehicle& c = fleet.vehicles[i];
    VehicleSample s{c.id, c.lane, c.x, c.y, c.u, c.v, 0.0, false};
    const auto partner = select_interacting(i, fleet);
    if (partner.has_value()) {
      s.rho = local_density(i, *partner, fleet);
      s.has_partner = true;
    }
    out.push_back(s);
  }
  return out;
}

/// Cell averages of the per-vehicle samples on an nx-by-ny grid over
/// [ax,bx] x [ay,by]; cells holding no vehicle report zero.
struct BinnedField {
  int nx = 0, ny = 0;
  std::vector<double> rho, rho_u, rho_v;  ///< size nx*ny, index j*nx+i
  std::vector<int> count;
};

inline BinnedField fleet_to_field(const Fleet& fleet, int nx, int ny, double ax,
                                  double bx, double ay, double by) {
  if (nx < 1 || ny < 1 || !(bx > ax) || !(by > ay))
    throw InvalidStateError("invalid state: malformed sampling grid");
  BinnedField f;
  f.nx = nx;
  f.ny = ny;
  f.rho.assign(static_cast<std::size_t>(nx) * ny, 0.0);
  f.rho_u.assign(f.rho.size(), 0.0);
  f.rho_v.assign(f.rho.size(), 0.0);
  f.count.assign(f.rho.size(), 0);
  const double dx = (bx - ax) / nx;
  const double dy = (by - ay) / ny;
  for (const VehicleSample& s : sample_fleet(fleet)) {
    if (!s.has_partner) continue;
    const int i = static_cast<int>(std::floor((s.x - ax) / dx));
    const int j = static_cast<int>(std::floor((s.y - ay) / dy));
    if (i < 0 || i >= nx || j < 0 || j >= ny) continue;
    const std::size_t k = static_cast<std::size_t>(j) * nx + i;
    f.rho[k] += s.rho;
    f.rho_u[k] += s.rho * s.u;
    f.rho_v[k] += s.rho * s.v;
    ++f.count[k];
  }
  for (std::size_t k = 0; k < f.rho.size(); ++k) {
    if (f.count[k] > 0) {
      f.rho[k] /= f.count[k];
      f.rho_u[k] /= f.count[k];
      f.rho_v[k] /= f.count[k];
    }
  }
  return f;
}

}  // namespace lanewave::micro
