#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "lanewave/core.hpp"
#include "lanewave/errors.hpp"

// Planar Riemann-problem machinery along a unit direction: wave
// classification, shock speeds, rarefaction fans and the intermediate-state
// constructions for the sigma = 0 and sigma > 0 data classes.

namespace lanewave::riemann {

inline constexpr double kInvariantTol = 1e-10;

inline double w_of(const PrimitiveState& s, const ModelParams& p) {
  return s.u + pressure1(std::max(s.rho, p.rho_floor), p);
}
inline double sigma_of(const PrimitiveState& s, const ModelParams& p) {
  return s.v + pressure2(std::max(s.rho, p.rho_floor), p);
}

enum class WaveKind {
  identity,       ///< equal states; a degenerate contact
  shock1,
  rarefaction1,
  contact2,
  contact3,
  not_elementary,
};

struct Classification {
  WaveKind kind = WaveKind::not_elementary;
  std::array<double, 3> invariant_jumps{};  ///< z_k(left) - z_k(right)
};

/// Matches the invariants z1, z2, z3 in priority order at tolerance 1e-10.
/// A z1 match with u_l + v_l > u_r + v_r is a 1-shock, with < a
/// 1-rarefaction; equal states report as a degenerate (identity) contact.
inline Classification classify(const PrimitiveState& l, const PrimitiveState& r,
                               const ModelParams& p) {
  const auto zl = riemann_invariants(l, p);
  const auto zr = riemann_invariants(r, p);
  Classification c;
  for (int k = 0; k < 3; ++k) c.invariant_jumps[k] = zl[k] - zr[k];
  const bool m1 = std::abs(c.invariant_jumps[0]) <= kInvariantTol;
  const bool m2 = std::abs(c.invariant_jumps[1]) <= kInvariantTol;
  const bool m3 = std::abs(c.invariant_jumps[2]) <= kInvariantTol;
  if (m1 && m2 && m3) {
    c.kind = WaveKind::identity;
  } else if (m1 && !m2) {
    c.kind = (zl[1] > zr[1]) ? WaveKind::shock1 : WaveKind::rarefaction1;
  } else if (m2) {
    c.kind = WaveKind::contact2;
  } else if (m3) {
    c.kind = WaveKind::contact3;
  }
  return c;
}

/// 1-shock speed from the mass jump condition,
///   s = (rho_r (u_r + v_r) - rho_l (u_l + v_l)) / (rho_r - rho_l).
inline double shock_speed(const PrimitiveState& l, const PrimitiveState& r) {
  if (std::abs(l.rho - r.rho) <= 1e-12)
    throw InvalidStateError("degenerate shock (equal densities)");
  return (r.rho * (r.u + r.v) - l.rho * (l.u + l.v)) / (r.rho - l.rho);
}

struct FanSample {
  double xi = 0.0;  ///< similarity speed
  PrimitiveState state;
};

namespace detail5 {

// 1-wave curve tangent: both defining systems of the intermediate states
// keep w = u + P1 and sigma = v + P2 constant across the first family, so
// the curve through a state is parameterized by rho with
// du = -P1'(rho) drho, dv = -P2'(rho) drho.
inline std::array<double, 3> curve_direction(const std::array<double, 3>& s,
                                             const ModelParams& p) {
  return {1.0, -pressure_derivative(s[0], p.u_ref, p.gamma1),
          -pressure_derivative(s[0], p.v_ref, p.gamma2)};
}

inline double lambda1_raw(const std::array<double, 3>& s, const Direction& xi,
                          const ModelParams& p) {
  return -(xi.xi1 * rho_dpressure(s[0], p.u_ref, p.gamma1) +
           xi.xi2 * rho_dpressure(s[0], p.v_ref, p.gamma2));
}

// dU/dxi = r / (grad lambda1 . r), gradient by central differences.
inline std::array<double, 3> fan_tangent(const std::array<double, 3>& s,
                                         const Direction& xi, const ModelParams& p) {
  const double h = 1e-6;
  std::array<double, 3> grad{};
  for (int k = 0; k < 3; ++k) {
    std::array<double, 3> up = s, dn = s;
    up[k] += h;
    dn[k] -= h;
    grad[k] = (lambda1_raw(up, xi, p) - lambda1_raw(dn, xi, p)) / (2.0 * h);
  }
  const std::array<double, 3> r = curve_direction(s, p);
  const double dot = grad[0] * r[0] + grad[1] * r[1] + grad[2] * r[2];
  if (std::abs(dot) < 1e-10)
    throw NumericalError("degenerate field: grad(lambda1) . r below 1e-10");
  return {r[0] / dot, r[1] / dot, r[2] / dot};
}

}  // namespace detail5

/// Samples the 1-rarefaction fan between two states on the same 1-wave
/// curve: integrates dU/dxi = r1(U) / (grad lambda1(U) . r1(U)) from
/// lambda1(Wl) to lambda1(Wr) with an RK4 marcher and returns n states at
/// strictly increasing fan speeds. The integration must land on Wr to 1e-6.
inline std::vector<FanSample> rarefaction_fan(const PrimitiveState& l,
                                              const PrimitiveState& r, const Direction& xi,
                                              int n, const ModelParams& p) {
  const Classification c = classify(l, r, p);
  if (c.kind == WaveKind::identity) return {};
  if (c.kind != WaveKind::rarefaction1)
    throw InvalidStateError("invalid state: states are not joined by a 1-rarefaction");

  const double xi0 = eigenvalues(l, xi, p)[0];
  const double xi1 = eigenvalues(r, xi, p)[0];
  if (!(xi0 < xi1))
    throw NumericalError("degenerate field: fan speeds do not increase");

  n = std::max(n, 2);
  const int refine = std::max(1, (256 + n - 2) / (n - 1));
  const int substeps = (n - 1) * refine;
  const double h = (xi1 - xi0) / substeps;

  std::vector<FanSample> fan;
  fan.reserve(n);
  std::array<double, 3> s{l.rho, l.u, l.v};
  fan.push_back({xi0, l});
  for (int m = 0; m < substeps; ++m) {
    const double t = xi0 + m * h;
    const auto k1 = detail5::fan_tangent(s, xi, p);
    std::array<double, 3> s2, s3, s4;
    for (int k = 0; k < 3; ++k) s2[k] = s[k] + 0.5 * h * k1[k];
    const auto k2 = detail5::fan_tangent(s2, xi, p);
    for (int k = 0; k < 3; ++k) s3[k] = s[k] + 0.5 * h * k2[k];
    const auto k3 = detail5::fan_tangent(s3, xi, p);
    for (int k = 0; k < 3; ++k) s4[k] = s[k] + h * k3[k];
    const auto k4 = detail5::fan_tangent(s4, xi, p);
    for (int k = 0; k < 3; ++k)
      s[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    (void)t;
    if ((m + 1) % refine == 0)
      fan.push_back({xi0 + (m + 1) * h, PrimitiveState{s[0], s[1], s[2]}});
  }

  const double err = detail::max3(std::abs(s[0] - r.rho), std::abs(s[1] - r.u),
                                  std::abs(s[2] - r.v));
  if (err > 1e-6)
    throw NumericalError(
        "numerical failure: rarefaction endpoints do not connect (residual " +
        std::to_string(err) + ")");
  fan.back().state = r;
  return fan;
}

namespace detail5 {

/// Safeguarded Newton (bisection fallback) for pressure(rho) = target on a
/// bracket; the pressure law is strictly increasing so the bracket is valid.
inline double pressure_root(double target, double ref, double gamma, double lo,
                            double hi) {
  double flo = pressure(lo, ref, gamma) - target;
  double fhi = pressure(hi, ref, gamma) - target;
  if (flo > 0.0 || fhi < 0.0) {
    std::ostringstream msg;
    msg << "no admissible intermediate state: pressure target " << target
        << " outside bracket, residuals [" << flo << ", " << fhi << "]";
    throw NumericalError(msg.str());
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(target));
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double fx = pressure(x, ref, gamma) - target;
    if (std::abs(fx) <= tol) return x;
    if (fx > 0.0)
      hi = x;
    else
      lo = x;
    const double dfx = pressure_derivative(x, ref, gamma);
    double xn = x - fx / dfx;
    if (!std::isfinite(xn) || xn <= lo || xn >= hi) xn = 0.5 * (lo + hi);
    x = xn;
  }
  throw NumericalError("no admissible intermediate state: root iteration stalled");
}

}  // namespace detail5

enum class Case1Variant {
  standard,    ///< rho* from u_l - u* + P1(rho_l); preserves z1
  sum_compat,  ///< alternate sign convention u_l + u* + P1(rho_l); does not
               ///< preserve z1, kept for reference only
};

struct Case1Result {
  PrimitiveState star;
  bool clamped = false;  ///< rho* left [rho_floor, rho_max] and was clamped
};

/// Intermediate state for sigma_l = sigma_r = 0 data: a 1-wave into
/// (rho*, u* = u_r) followed by a 2-contact. The returned state stays on
/// the sigma = 0 manifold (v* = -P2(rho*)).
inline Case1Result solve_case1(const PrimitiveState& l, const PrimitiveState& r,
                               const ModelParams& p,
                               Case1Variant variant = Case1Variant::standard) {
  if (std::abs(sigma_of(l, p)) > kInvariantTol || std::abs(sigma_of(r, p)) > kInvariantTol)
    throw InvalidStateError("invalid state: case-1 data must have sigma = 0 on both sides");
  const double u_star = r.u;
  const double target = (variant == Case1Variant::standard)
                            ? l.u - u_star + pressure1(std::max(l.rho, p.rho_floor), p)
                            : l.u + u_star + pressure1(std::max(l.rho, p.rho_floor), p);
  const PressureInverse inv =
      pressure_inverse(target, p.u_ref, p.gamma1, p.rho_floor, p.rho_max);
  Case1Result out;
  out.star = PrimitiveState{inv.rho, u_star, -pressure2(inv.rho, p)};
  out.clamped = inv.clamped;
  return out;
}

struct Case2Result {
  PrimitiveState left_star;
  PrimitiveState right_star;
  bool lane_change = false;        ///< the v_l > 0 sub-case was taken
  std::array<double, 6> residuals{};  ///< defining equations at the returned states
};

/// Intermediate states for sigma_l = sigma_r > 0 data. The left state joins
/// its intermediate through a 1-wave (w, sigma preserved) with u*_l = u_l +
/// v_l when v_l > 0 (lane changing possible) or u*_l = u_l when v_l = 0;
/// the right intermediate carries u*_r = u_r with the same w, sigma pair,
/// the two being separated by the vacuum of the 2-contact. Residuals of all
/// six defining equations are reported.
inline Case2Result solve_case2(const PrimitiveState& l, const PrimitiveState& r,
                               const ModelParams& p) {
  const double sl = sigma_of(l, p);
  const double sr = sigma_of(r, p);
  if (std::abs(sl - sr) > kInvariantTol)
    throw InvalidStateError("invalid state: case-2 data must share sigma");
  if (!(sl > kInvariantTol))
    throw InvalidStateError("invalid state: case-2 data needs sigma > 0");
  if (l.v < -kInvariantTol)
    throw InvalidStateError("invalid state: case-2 data needs v_l >= 0");

  Case2Result out;
  out.lane_change = l.v > kInvariantTol;

  const double wl = w_of(l, p);
  const double u_star_l = out.lane_change ? l.u + l.v : l.u;
  const double rho_star_l = detail5::pressure_root(wl - u_star_l, p.u_ref, p.gamma1,
                                                   p.rho_floor, p.rho_max);
  const double v_star_l = sl - pressure2(rho_star_l, p);
  out.left_star = PrimitiveState{rho_star_l, u_star_l, v_star_l};

  const double w_star_l = u_star_l + pressure1(rho_star_l, p);
  const double sigma_star_l = v_star_l + pressure2(rho_star_l, p);
  const double u_star_r = r.u;
  const double rho_star_r = detail5::pressure_root(w_star_l - u_star_r, p.u_ref,
                                                   p.gamma1, p.rho_floor, p.rho_max);
  const double v_star_r = sigma_star_l - pressure2(rho_star_r, p);
  out.right_star = PrimitiveState{rho_star_r, u_star_r, v_star_r};

  out.residuals[0] = (l.u + pressure1(l.rho, p)) - (u_star_l + pressure1(rho_star_l, p));
  out.residuals[1] = out.lane_change
                         ? (l.v + pressure2(l.rho, p)) - (v_star_l + pressure2(rho_star_l, p))
                         : pressure2(l.rho, p) - (v_star_l + pressure2(rho_star_l, p));
  out.residuals[2] = u_star_l - (out.lane_change ? l.u + l.v : l.u);
  out.residuals[3] =
      (u_star_l + pressure1(rho_star_l, p)) - (u_star_r + pressure1(rho_star_r, p));
  out.residuals[4] =
      (v_star_l + pressure2(rho_star_l, p)) - (v_star_r + pressure2(rho_star_r, p));
  out.residuals[5] = u_star_r - r.u;
  return out;
}

struct Wave {
  WaveKind kind = WaveKind::contact2;
  double speed_lo = 0.0;  ///< wave speed; fan head for rarefactions
  double speed_hi = 0.0;  ///< equal to speed_lo except for rarefactions
  PrimitiveState left;
  PrimitiveState right;
  std::vector<FanSample> fan;  ///< populated for rarefactions
};

/// Evaluates a self-similar wave pattern at similarity speed s: constant
/// states outside and between waves, interpolated states inside fans,
/// right-continuous at jump speeds.
inline PrimitiveState sample_solution(const std::vector<Wave>& waves, double s) {
  if (waves.empty()) throw InvalidStateError("invalid state: empty wave pattern");
  for (std::size_t k = 0; k < waves.size(); ++k) {
    if (waves[k].speed_lo > waves[k].speed_hi)
      throw InvalidStateError("non-ordered wave pattern");
    if (k + 1 < waves.size() && waves[k].speed_hi > waves[k + 1].speed_lo)
      throw InvalidStateError("non-ordered wave pattern");
  }
  for (const Wave& w : waves) {
    if (s < w.speed_lo) return w.left;
    if (s < w.speed_hi) {
      if (w.fan.size() < 2)
        throw InvalidStateError("invalid state: rarefaction wave carries no fan");
      auto hi = std::lower_bound(w.fan.begin(), w.fan.end(), s,
                                 [](const FanSample& a, double b) { return a.xi < b; });
      if (hi == w.fan.begin()) return hi->state;
      const FanSample& b = *hi;
      const FanSample& a = *(hi - 1);
      const double t = (s - a.xi) / (b.xi - a.xi);
      return PrimitiveState{a.state.rho + t * (b.state.rho - a.state.rho),
                            a.state.u + t * (b.state.u - a.state.u),
                            a.state.v + t * (b.state.v - a.state.v)};
    }
  }
  return waves.back().right;
}

struct LaxCheck {
  double lambda_left = 0.0;
  double shock = 0.0;
  double lambda_right = 0.0;
  bool admissible = false;  ///< lambda1(l) >= s >= lambda1(r)
};

/// Reports (never hides) whether a 1-shock satisfies the Lax inequalities
/// along the given direction.
inline LaxCheck lax_admissibility(const PrimitiveState& l, const PrimitiveState& r,
                                  const Direction& xi, const ModelParams& p) {
  LaxCheck c;
  c.lambda_left = eigenvalues(l, xi, p)[0];
  c.lambda_right = eigenvalues(r, xi, p)[0];
  c.shock = shock_speed(l, r);
  c.admissible = c.lambda_left >= c.shock && c.shock >= c.lambda_right;
  return c;
}

}  // namespace lanewave::riemann
