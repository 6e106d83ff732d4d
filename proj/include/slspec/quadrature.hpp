#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "slspec/coefficients.hpp"

namespace slspec::detail {

/// Coefficients at x in [a, b], right limit at segment boundaries (and the
/// last segment's value at x = b).
template <typename Scalar>
PQR<Scalar> coefficients_at(const CoefficientSet<Scalar>& coeffs, Scalar x) {
  return coeffs.segments()[coeffs.segment_index(x)].eval(x);
}

/// Integral over [lo, hi] of f(x, p, q, r), split at segment boundaries so
/// each piece is smooth; adaptive Gauss-Kronrod on each piece.
template <typename Scalar, typename F>
Scalar integrate_coefficients(const CoefficientSet<Scalar>& coeffs, Scalar lo, Scalar hi, F f) {
  using boost::math::quadrature::gauss_kronrod;
  Scalar total = 0;
  for (const auto& seg : coeffs.segments()) {
    const Scalar l = std::max(lo, seg.lo);
    const Scalar h = std::min(hi, seg.hi);
    if (!(l < h)) continue;
    auto g = [&](Scalar x) {
      const PQR<Scalar> c = seg.eval(x);
      return f(x, c.p, c.q, c.r);
    };
    if (seg.is_constant()) {
      // The integrand may still depend on x explicitly; a fixed rule is
      // exact for the constant part and accurate otherwise.
      total += gauss_kronrod<Scalar, 31>::integrate(g, l, h, 10, Scalar(1e-13));
    } else {
      total += gauss_kronrod<Scalar, 31>::integrate(g, l, h, 15, Scalar(1e-12));
    }
  }
  return total;
}

/// inf and sup of r over the closed window [lo, hi]. Callable segments are
/// sampled.
template <typename Scalar>
std::pair<Scalar, Scalar> r_extrema(const CoefficientSet<Scalar>& coeffs, Scalar lo, Scalar hi) {
  Scalar r_min = std::numeric_limits<Scalar>::infinity();
  Scalar r_max = 0;
  auto take = [&](Scalar r) {
    r_min = std::min(r_min, r);
    r_max = std::max(r_max, r);
  };
  for (const auto& seg : coeffs.segments()) {
    const Scalar l = std::max(lo, seg.lo);
    const Scalar h = std::min(hi, seg.hi);
    if (l > h || (l == h && h == seg.hi && h != coeffs.b())) continue;
    if (seg.is_constant()) {
      take(seg.constant().r);
      continue;
    }
    constexpr int kSamples = 64;
    for (int k = 0; k <= kSamples; ++k) {
      take(seg.eval(l + (h - l) * Scalar(k) / kSamples).r);
    }
  }
  return {r_min, r_max};
}

}  // namespace slspec::detail
