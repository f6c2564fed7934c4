#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "lanewave/errors.hpp"

// Model constants, state representations, pressure laws, conserved/primitive
// conversions, physical fluxes and the analytic eigenstructure of the 2D
// second-order traffic system
//
//   rho_t + (rho u)_x + (rho v)_y = 0
//   (rho w)_t + (rho u w)_x + (rho v w)_y = 0,      w = u + P1(rho)
//   (rho sigma)_t + (rho u sigma)_x + (rho v sigma)_y = 0,  sigma = v + P2(rho)
//
// with power-law (or logarithmic) traffic pressures P1, P2.

namespace lanewave {

namespace detail {

// pow with fast paths for the exponents used in practice.
inline double pow_gamma(double x, double g) {
  if (g == 1.0) return x;
  if (g == 2.0) return x * x;
  return std::pow(x, g);
}

inline double max3(double a, double b, double c) {
  return std::max(a, std::max(b, c));
}

}  // namespace detail

/// Pressure-law and regularization parameters shared by all modules.
struct ModelParams {
  double u_ref = 1.0;       ///< reference longitudinal speed
  double v_ref = 0.009;     ///< reference lateral speed (may be small or negative)
  double gamma1 = 1.0;      ///< longitudinal pressure exponent, >= 0
  double gamma2 = 1.0;      ///< lateral pressure exponent, >= 0
  double rho_floor = 1e-8;  ///< vacuum-regularization density, > 0
  double rho_max = 1.0;     ///< normalization density

  /// Throws InvalidStateError on hard invariant violations; returns
  /// soft warnings (e.g. the genuine-nonlinearity degeneracy when the
  /// two pressure laws coincide).
  std::vector<std::string> validate() const {
    if (!(u_ref > 0.0)) throw InvalidStateError("invalid state: u_ref must be > 0");
    if (!(rho_floor > 0.0)) throw InvalidStateError("invalid state: rho_floor must be > 0");
    if (!(rho_floor < rho_max)) throw InvalidStateError("invalid state: rho_floor must be < rho_max");
    if (gamma1 < 0.0 || gamma2 < 0.0) throw InvalidStateError("invalid state: gamma exponents must be >= 0");
    std::vector<std::string> warnings;
    if (gamma1 == gamma2 && u_ref == v_ref) {
      warnings.push_back(
          "genuine-nonlinearity degeneracy: identical pressure laws "
          "(gamma1 == gamma2 and u_ref == v_ref) make the first "
          "characteristic field linearly degenerate");
    }
    return warnings;
  }
};

/// Point state in primitive variables (density, directional speeds).
struct PrimitiveState {
  double rho = 0.0;  ///< density, >= 0
  double u = 0.0;    ///< longitudinal speed, >= 0
  double v = 0.0;    ///< lateral speed, signed
};

/// Conserved vector (rho, rho w, rho sigma).
struct ConservedState {
  double rho = 0.0;
  double rho_w = 0.0;
  double rho_sigma = 0.0;
};

/// Unit direction in the (x, y) plane.
struct Direction {
  double xi1 = 1.0;
  double xi2 = 0.0;

  static Direction of(double x, double y) {
    const double n = std::hypot(x, y);
    if (!(n > 0.0) || !std::isfinite(n))
      throw InvalidStateError("invalid state: direction must be nonzero and finite");
    return Direction{x / n, y / n};
  }
  static Direction unit_x() { return Direction{1.0, 0.0}; }
  static Direction unit_y() { return Direction{0.0, 1.0}; }
};

enum class Axis { x, y };

inline void check_primitive(const PrimitiveState& w) {
  if (!std::isfinite(w.rho) || !std::isfinite(w.u) || !std::isfinite(w.v))
    throw InvalidStateError("invalid state: non-finite primitive state");
  if (w.rho < 0.0) throw InvalidStateError("invalid state: negative density");
  if (w.u < 0.0) throw InvalidStateError("invalid state: negative longitudinal speed");
}

inline void check_conserved(const ConservedState& q) {
  if (!std::isfinite(q.rho) || !std::isfinite(q.rho_w) || !std::isfinite(q.rho_sigma))
    throw InvalidStateError("invalid state: non-finite conserved state");
}

/// Traffic pressure P(rho) = ref * rho^gamma / gamma for gamma > 0,
/// P(rho) = ref * ln(rho) for gamma = 0. Strictly increasing in rho for
/// positive ref. Callers clamp rho to the vacuum floor before calling the
/// logarithmic branch.
inline double pressure(double rho, double ref_speed, double gamma) {
  if (!std::isfinite(rho) || !std::isfinite(ref_speed) || !std::isfinite(gamma))
    throw InvalidStateError("invalid state: non-finite pressure input");
  if (gamma < 0.0) throw InvalidStateError("invalid state: gamma must be >= 0");
  if (gamma > 0.0) return ref_speed * detail::pow_gamma(rho, gamma) / gamma;
  return ref_speed * std::log(rho);
}

/// dP/drho.
inline double pressure_derivative(double rho, double ref_speed, double gamma) {
  if (gamma > 0.0) return ref_speed * detail::pow_gamma(rho, gamma - 1.0);
  return ref_speed / rho;
}

/// rho * dP/drho, the speed offset entering every eigenvalue.
inline double rho_dpressure(double rho, double ref_speed, double gamma) {
  if (gamma > 0.0) return ref_speed * detail::pow_gamma(rho, gamma);
  return ref_speed;
}

/// d/drho (rho * dP/drho); the first characteristic field is genuinely
/// nonlinear where this differs between the two pressure laws.
inline double rho_dpressure_derivative(double rho, double ref_speed, double gamma) {
  if (gamma > 0.0) return ref_speed * gamma * detail::pow_gamma(rho, gamma - 1.0);
  return 0.0;
}

struct PressureInverse {
  double rho = 0.0;
  bool clamped = false;
};

/// Inverse of the pressure law, clamped to [rho_floor, rho_max] with a flag
/// when the preimage falls outside that range. Riemann intermediate states
/// can land beyond rho_max; clamping keeps solvers running while recording
/// the event.
inline PressureInverse pressure_inverse(double p, double ref_speed, double gamma,
                                        double rho_floor, double rho_max) {
  if (!std::isfinite(p)) throw InvalidStateError("invalid state: non-finite pressure value");
  double rho;
  if (gamma > 0.0) {
    if (!(ref_speed > 0.0))
      throw InvalidStateError("invalid state: pressure inverse needs ref_speed > 0");
    if (p < 0.0) throw InvalidStateError("no preimage: negative pressure with gamma > 0");
    rho = std::pow(gamma * p / ref_speed, 1.0 / gamma);
  } else {
    rho = std::exp(p / ref_speed);
  }
  PressureInverse out;
  out.rho = std::min(std::max(rho, rho_floor), rho_max);
  out.clamped = (out.rho != rho);
  return out;
}

inline double pressure1(double rho, const ModelParams& p) {
  return pressure(rho, p.u_ref, p.gamma1);
}
inline double pressure2(double rho, const ModelParams& p) {
  return pressure(rho, p.v_ref, p.gamma2);
}

inline ConservedState primitive_to_conserved(const PrimitiveState& w, const ModelParams& p) {
  check_primitive(w);
  if (w.rho < p.rho_floor) return ConservedState{w.rho, 0.0, 0.0};
  return ConservedState{w.rho, w.rho * (w.u + pressure1(w.rho, p)),
                        w.rho * (w.v + pressure2(w.rho, p))};
}

struct Conversion {
  PrimitiveState state;
  bool vacuum = false;     ///< density below rho_floor; speeds defined as 0
  bool u_clamped = false;  ///< recovered u was negative and clamped to 0
};

/// Recovers (rho, u, v) from the conserved vector. Below the vacuum floor
/// the system loses hyperbolicity and w, sigma are undefined, so the state
/// is flagged and speeds are set to zero rather than divided out.
inline Conversion conserved_to_primitive(const ConservedState& q, const ModelParams& p) {
  check_conserved(q);
  Conversion out;
  if (q.rho < p.rho_floor) {
    out.state = PrimitiveState{p.rho_floor, 0.0, 0.0};
    out.vacuum = true;
    return out;
  }
  double u = q.rho_w / q.rho - pressure1(q.rho, p);
  const double v = q.rho_sigma / q.rho - pressure2(q.rho, p);
  if (u < 0.0) {
    u = 0.0;
    out.u_clamped = true;
  }
  out.state = PrimitiveState{q.rho, u, v};
  if (!std::isfinite(out.state.u) || !std::isfinite(out.state.v))
    throw InvalidStateError("invalid state: non-finite speeds recovered from conserved state");
  return out;
}

using Flux = std::array<double, 3>;

/// Physical flux f(q) = (rho u, rho u w, rho u sigma) along x, or
/// g(q) = (rho v, rho v w, rho v sigma) along y; equivalently the advective
/// speed times the conserved vector.
inline Flux physical_flux(const ConservedState& q, Axis axis, const ModelParams& p) {
  const Conversion c = conserved_to_primitive(q, p);
  const double s = (axis == Axis::x) ? c.state.u : c.state.v;
  if (c.vacuum) return Flux{0.0, 0.0, 0.0};
  return Flux{s * q.rho, s * q.rho_w, s * q.rho_sigma};
}

/// Wave speeds of the quasilinear system along a unit direction xi:
///   lambda1 = -(xi1 rho P1' + xi2 rho P2')
///   lambda2 = xi1 (u - rho P1') + xi2 (v - rho P2')
///   lambda3 = xi1 u + xi2 v
/// lambda2 is evaluated as lambda1 + lambda3 so the identity holds bitwise.
inline std::array<double, 3> eigenvalues(const PrimitiveState& w, const Direction& xi,
                                         const ModelParams& p) {
  check_primitive(w);
  const double a = rho_dpressure(w.rho, p.u_ref, p.gamma1);
  const double b = rho_dpressure(w.rho, p.v_ref, p.gamma2);
  const double l1 = -(xi.xi1 * a + xi.xi2 * b);
  const double l3 = xi.xi1 * w.u + xi.xi2 * w.v;
  return {l1, l1 + l3, l3};
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Coefficient matrix C(U, xi) = xi1 A(U) + xi2 B(U) of the quasilinear form
/// in the variables U = (rho, u, v). The lower-right 2x2 block has trace
/// lambda1 + lambda2 and determinant lambda1 * lambda2, so the closed-form
/// eigenvalues above are exactly the spectrum of C.
inline Matrix3 quasilinear_matrix(const PrimitiveState& w, const Direction& xi,
                                  const ModelParams& p) {
  const double a = rho_dpressure(w.rho, p.u_ref, p.gamma1);
  const double b = rho_dpressure(w.rho, p.v_ref, p.gamma2);
  const Matrix3 A{{{w.u, w.rho, 0.0},
                   {0.0, w.u - a, 0.0},
                   {0.0, w.v, -a}}};
  const Matrix3 B{{{w.v, 0.0, w.rho},
                   {0.0, -b, w.u},
                   {0.0, 0.0, w.v - b}}};
  Matrix3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c[i][j] = xi.xi1 * A[i][j] + xi.xi2 * B[i][j];
  return c;
}

inline double matrix_inf_norm(const Matrix3& m) {
  double n = 0.0;
  for (const auto& row : m)
    n = std::max(n, std::abs(row[0]) + std::abs(row[1]) + std::abs(row[2]));
  return n;
}

struct EigenDecomposition {
  bool degenerate = false;                        ///< spectrum not pairwise distinct
  std::array<double, 3> values{};                 ///< lambda1 <= ... as the closed forms
  std::array<std::array<double, 3>, 3> vectors{}; ///< unit right eigenvectors, rows
};

/// Right eigenvectors of C(U, xi), computed numerically. Each r_k is the
/// null vector of (C - lambda_k I), obtained from the cross product of the
/// two most independent rows. A pairwise eigenvalue separation below
/// 1e-10 (relative to the matrix scale) is flagged and no vectors are
/// produced; the same applies below the vacuum floor where the system is
/// not hyperbolic.
inline EigenDecomposition eigenvectors_numeric(const PrimitiveState& w, const Direction& xi,
                                               const ModelParams& p) {
  EigenDecomposition out;
  out.values = eigenvalues(w, xi, p);
  if (w.rho < p.rho_floor) {
    out.degenerate = true;
    return out;
  }
  const Matrix3 c = quasilinear_matrix(w, xi, p);
  const double scale = std::max(1.0, matrix_inf_norm(c));
  const double tol = 1e-10 * scale;
  if (std::abs(out.values[0] - out.values[1]) <= tol ||
      std::abs(out.values[0] - out.values[2]) <= tol ||
      std::abs(out.values[1] - out.values[2]) <= tol) {
    out.degenerate = true;
    return out;
  }
  for (int k = 0; k < 3; ++k) {
    Matrix3 m = c;
    for (int i = 0; i < 3; ++i) m[i][i] -= out.values[k];
    // null vector from the largest cross product of row pairs
    std::array<double, 3> best{0.0, 0.0, 0.0};
    double best_norm2 = -1.0;
    static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (const auto& pr : pairs) {
      const auto& r = m[pr[0]];
      const auto& s = m[pr[1]];
      const std::array<double, 3> cr{r[1] * s[2] - r[2] * s[1],
                                     r[2] * s[0] - r[0] * s[2],
                                     r[0] * s[1] - r[1] * s[0]};
      const double n2 = cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2];
      if (n2 > best_norm2) {
        best_norm2 = n2;
        best = cr;
      }
    }
    if (!(best_norm2 > 0.0)) {
      out.degenerate = true;
      return out;
    }
    const double n = std::sqrt(best_norm2);
    for (double& x : best) x /= n;
    out.vectors[k] = best;
  }
  return out;
}

/// Closed-form eigenvector candidates
///   r1 = (-(u+v)/(v (P1'+P2')), u/v, 1), r2 = (0, -1, 1), r3 = (1, 0, 0),
/// exposed only for diagnostic comparison against the numeric decomposition
/// (r1 and r2 do not solve C r = lambda r in general; r1 is undefined at
/// v = 0). Vectors are unnormalized.
inline std::optional<std::array<std::array<double, 3>, 3>> eigenvectors_closed_form(
    const PrimitiveState& w, const ModelParams& p) {
  if (w.v == 0.0) return std::nullopt;
  const double dp1 = pressure_derivative(w.rho, p.u_ref, p.gamma1);
  const double dp2 = pressure_derivative(w.rho, p.v_ref, p.gamma2);
  if (dp1 + dp2 == 0.0) return std::nullopt;
  const std::array<std::array<double, 3>, 3> r{{
      {-(w.u + w.v) / (w.v * (dp1 + dp2)), w.u / w.v, 1.0},
      {0.0, -1.0, 1.0},
      {1.0, 0.0, 0.0},
  }};
  return r;
}

/// Riemann invariants, in the sense of Lax, of the three characteristic
/// fields: z1 = u + v + P1 + P2, z2 = u + v, z3 = u.
inline std::array<double, 3> riemann_invariants(const PrimitiveState& w, const ModelParams& p) {
  check_primitive(w);
  const double rho = std::max(w.rho, p.rho_floor);
  const double z1 = w.u + w.v + pressure1(rho, p) + pressure2(rho, p);
  return {z1, w.u + w.v, w.u};
}

/// Equilibrium speed u = c - P(rho) for a constant desired speed c; with
/// gamma = 1 and c = ref_speed this is the Greenshields line.
inline double closure_speed(double rho, double c, double ref_speed, double gamma) {
  if (gamma == 0.0 && rho <= 0.0)
    throw InvalidStateError("invalid state: logarithmic closure needs rho > 0");
  return c - pressure(rho, ref_speed, gamma);
}

}  // namespace lanewave
