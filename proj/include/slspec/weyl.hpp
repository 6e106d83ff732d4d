#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "slspec/coefficients.hpp"
#include "slspec/error.hpp"
#include "slspec/propagate.hpp"

namespace slspec {

/// Truncated estimate of the Weyl m-function m_{b,alpha}(z).
///
/// `radius` is the Weyl-disk radius at X; the true value lies within the
/// disk whose boundary passes through m. `converged` is false when an
/// adaptive search hit its truncation cap before reaching its target.
template <typename Scalar>
struct MFunctionEstimate {
  std::complex<Scalar> z;
  std::complex<Scalar> m;
  Scalar X;
  Scalar radius;
  Scalar bc_alpha = 0;
  bool converged = true;
};

template <typename Scalar>
bool is_projective_infinity(std::complex<Scalar> m) {
  return std::isinf(m.real()) || std::isinf(m.imag());
}

/// m_{b,alpha} from m_{b,beta}:
///   (cos(a-b) m + sin(a-b)) / (cos(a-b) - sin(a-b) m),
/// extended projectively; infinity is any value with an infinite component.
template <typename Scalar>
std::complex<Scalar> rotate_bc(std::complex<Scalar> m, Scalar alpha, Scalar beta) {
  using Complex = std::complex<Scalar>;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  // The map has period pi in alpha - beta.
  const Scalar d = std::remainder(alpha - beta, std::numbers::pi_v<Scalar>);
  if (d == 0) return m;
  const Scalar c = std::cos(d);
  const Scalar s = std::sin(d);
  if (is_projective_infinity(m)) {
    if (s == 0) return Complex(inf, 0);
    return Complex(-c / s, 0);
  }
  const Complex den = c - s * m;
  if (den == Complex(0)) return Complex(inf, 0);
  return (c * m + s) / den;
}

namespace detail {

/// Boundary data at a of the solution vanishing at X (Dirichlet truncation),
/// obtained by propagating backward, where that solution dominates.
template <typename Scalar>
SolutionState<Scalar> truncated_weyl_solution(const CoefficientSet<Scalar>& coeffs,
                                              std::complex<Scalar> z, Scalar X, Scalar tol,
                                              std::complex<Scalar> u_X = 0,
                                              std::complex<Scalar> pu_X = -1) {
  auto st = SolutionState<Scalar>::initial(X, z, u_X, pu_X);
  advance(coeffs, st, coeffs.a(), tol, false);
  return st;
}

template <typename Scalar>
std::complex<Scalar> m_from_boundary(const SolutionState<Scalar>& at_a, Scalar alpha) {
  const Scalar c = std::cos(alpha), s = std::sin(alpha);
  const std::complex<Scalar> num = c * at_a.pu + s * at_a.u;
  const std::complex<Scalar> den = c * at_a.u - s * at_a.pu;
  const std::complex<Scalar> m = num / den;
  if (den == std::complex<Scalar>(0) || !std::isfinite(m.real()) || !std::isfinite(m.imag())) {
    throw Error(ErrorCode::TruncationUnstable, "boundary value of the truncated solution vanished");
  }
  return m;
}

template <typename Scalar>
Scalar weyl_radius(const SolutionState<Scalar>& s_alpha, std::complex<Scalar> z) {
  return std::exp(-2 * s_alpha.log_norm()) / (2 * std::abs(z.imag()));
}

template <typename Scalar>
void check_truncation(const CoefficientSet<Scalar>& coeffs, std::complex<Scalar> z, Scalar X) {
  if (z.imag() == 0) throw Error(ErrorCode::RealAxis, "m_function needs Im z != 0");
  if (!(X > coeffs.a()) || X > coeffs.b() || !std::isfinite(X)) {
    throw Error(ErrorCode::OutOfDomain, "truncation point X must lie in (a, b]");
  }
}

}  // namespace detail

/// m_{b,alpha}(z) for the problem truncated with a Dirichlet condition at X.
template <typename Scalar>
MFunctionEstimate<Scalar> m_function(const CoefficientSet<Scalar>& coeffs, std::complex<Scalar> z,
                                     Scalar X, Scalar tol, Scalar bc_alpha = 0) {
  detail::check_truncation(coeffs, z, X);
  const auto at_a = detail::truncated_weyl_solution(coeffs, z, X, tol);
  const std::complex<Scalar> m = detail::m_from_boundary(at_a, bc_alpha);
  auto s = SolutionState<Scalar>::initial(coeffs.a(), z, -std::sin(bc_alpha), std::cos(bc_alpha));
  s = propagate(coeffs, s, X, tol);
  return {z, m, X, detail::weyl_radius(s, z), bc_alpha, true};
}

/// Doubles X from X_start until radius <= rel_tol * |m| or X reaches X_cap.
/// The forward solution used for the radius is extended incrementally.
template <typename Scalar>
MFunctionEstimate<Scalar> m_function_converged(const CoefficientSet<Scalar>& coeffs,
                                               std::complex<Scalar> z, Scalar X_start,
                                               Scalar X_cap, Scalar rel_tol, Scalar tol,
                                               Scalar bc_alpha = 0) {
  Scalar X = std::min(X_start, X_cap);
  detail::check_truncation(coeffs, z, X);
  auto s = SolutionState<Scalar>::initial(coeffs.a(), z, -std::sin(bc_alpha), std::cos(bc_alpha));
  for (;;) {
    s = propagate(coeffs, s, X, tol);
    const auto at_a = detail::truncated_weyl_solution(coeffs, z, X, tol);
    const std::complex<Scalar> m = detail::m_from_boundary(at_a, bc_alpha);
    const Scalar radius = detail::weyl_radius(s, z);
    const bool done = radius <= rel_tol * std::abs(m);
    if (done || X >= X_cap) return {z, m, X, radius, bc_alpha, done};
    X = std::min(2 * X, X_cap);
  }
}

/// |Im m - Im z * ||u_b||^2_(a,X)| / |Im m| with u_b = c + m s.
template <typename Scalar>
Scalar im_identity_residual(const CoefficientSet<Scalar>& coeffs, std::complex<Scalar> z, Scalar X,
                            Scalar tol) {
  if (!(z.imag() > 0)) throw Error(ErrorCode::RealAxis, "im_identity_residual needs Im z > 0");
  const auto est = m_function(coeffs, z, X, tol);
  auto ub = SolutionState<Scalar>::initial(coeffs.a(), z, 1, est.m);
  ub = propagate(coeffs, ub, X, tol);
  const Scalar im_m = est.m.imag();
  return std::abs(im_m - z.imag() * ub.actual_norm_sq()) / std::abs(im_m);
}

template <typename Scalar>
struct HerglotzReport {
  std::vector<MFunctionEstimate<Scalar>> entries;
  /// Smallest Im m over the grid; +inf for an empty grid.
  Scalar min_margin = std::numeric_limits<Scalar>::infinity();
};

/// Checks Im m > -radius at every grid point (upper half-plane only).
template <typename Scalar>
HerglotzReport<Scalar> herglotz_scan(const CoefficientSet<Scalar>& coeffs,
                                     const std::vector<std::complex<Scalar>>& z_grid, Scalar X,
                                     Scalar tol = Scalar(1e-10)) {
  HerglotzReport<Scalar> report;
  std::ostringstream offenders;
  bool violated = false;
  for (const auto& z : z_grid) {
    if (!(z.imag() > 0)) throw Error(ErrorCode::InvalidArgument, "herglotz_scan needs Im z > 0");
    auto est = m_function(coeffs, z, X, tol);
    report.min_margin = std::min(report.min_margin, est.m.imag());
    if (!(est.m.imag() > -est.radius)) {
      violated = true;
      offenders << " (" << static_cast<double>(z.real()) << "," << static_cast<double>(z.imag())
                << ")";
    }
    report.entries.push_back(est);
  }
  if (violated) throw Error(ErrorCode::HerglotzViolation, "Im m <= -radius at z =" + offenders.str());
  return report;
}

}  // namespace slspec
