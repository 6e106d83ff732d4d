#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "slspec/coefficients.hpp"
#include "slspec/error.hpp"

namespace slspec {

/// A solution of tau u = z u sampled at x, in the (u, pu') chart, together
/// with the running norms  int_a^x |u|^2 r  and  int_a^x |pu'|^2 / r.
///
/// The represented solution is exp(log_scale) * (u, pu); the two norm
/// accumulators are stored in units of exp(2 log_scale). Propagation keeps
/// (u, pu) of moderate size by moving magnitude into log_scale, so solutions
/// growing like exp(c x) can be carried over long ranges.
template <typename Scalar>
struct SolutionState {
  using Complex = std::complex<Scalar>;

  Scalar x{};
  Complex u{};
  Complex pu{};
  Scalar norm_sq{};
  Scalar dnorm_sq{};
  Complex z{};
  Scalar log_scale{};

  static SolutionState initial(Scalar x, Complex z, Complex u, Complex pu) {
    return SolutionState{x, u, pu, Scalar(0), Scalar(0), z, Scalar(0)};
  }

  Complex actual_u() const { return u * std::exp(log_scale); }
  Complex actual_pu() const { return pu * std::exp(log_scale); }

  /// log of ||u||_(a,x); -inf before any accumulation.
  Scalar log_norm() const { return Scalar(0.5) * std::log(norm_sq) + log_scale; }
  Scalar log_dnorm() const { return Scalar(0.5) * std::log(dnorm_sq) + log_scale; }
  Scalar norm() const { return std::exp(log_norm()); }
  Scalar actual_norm_sq() const { return norm_sq * std::exp(2 * log_scale); }
  Scalar actual_dnorm_sq() const { return dnorm_sq * std::exp(2 * log_scale); }
};

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;

template <typename Scalar>
using Vector2c = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

/// Maps (u, pu') at x0 to (u, pu') at x1. Columns are the solutions started
/// from (1, 0) and (0, 1).
template <typename Scalar>
struct TransferMatrix {
  Matrix2c<Scalar> entries;

  std::complex<Scalar> det() const { return entries.determinant(); }
};

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<long double, 8> kGaussNodes = {
    -0.9602898564975362316835609L, -0.7966664774136267395915539L,
    -0.5255324099163289858177390L, -0.1834346424956498049394761L,
    0.1834346424956498049394761L,  0.5255324099163289858177390L,
    0.7966664774136267395915539L,  0.9602898564975362316835609L};
inline constexpr std::array<long double, 8> kGaussWeights = {
    0.1012285362903762591525314L, 0.2223810344533744705443560L,
    0.3137066458778872873379622L, 0.3626837833783619829651504L,
    0.3626837833783619829651504L, 0.3137066458778872873379622L,
    0.2223810344533744705443560L, 0.1012285362903762591525314L};

/// cos(w t) and sin(w t) / w for w = sqrt(w2). Both are entire in w2, so the
/// branch of the root is irrelevant; near w2 t^2 = 0 the series is used.
template <typename Scalar>
std::pair<std::complex<Scalar>, std::complex<Scalar>> cos_sinc(std::complex<Scalar> w2, Scalar t) {
  using Complex = std::complex<Scalar>;
  const Complex arg = w2 * t * t;
  if (std::abs(arg) < Scalar(1e-3)) {
    Complex c(1), s(1), tc(1), ts(1);
    for (int n = 1; n <= 8; ++n) {
      tc *= -arg / Scalar((2 * n - 1) * (2 * n));
      ts *= -arg / Scalar((2 * n) * (2 * n + 1));
      c += tc;
      s += ts;
    }
    return {c, s * t};
  }
  const Complex w = std::sqrt(w2);
  return {std::cos(w * t), std::sin(w * t) / w};
}

template <typename Scalar>
void renormalize(SolutionState<Scalar>& st) {
  static const Scalar kBig = std::ldexp(Scalar(1), 64);
  static const Scalar kSmall = std::ldexp(Scalar(1), -64);
  static const Scalar kNormCeiling = std::ldexp(Scalar(1), 800);
  Scalar m = std::max(std::abs(st.u), std::abs(st.pu));
  if (!(m > 0) || !std::isfinite(m)) return;
  if (m < kSmall) {
    // A decaying solution is scaled up only while its accumulated norms stay
    // representable; beyond that its further contributions are negligible.
    const Scalar acc = std::max(st.norm_sq, st.dnorm_sq);
    if (acc > 0) m = std::max(m, std::sqrt(acc / kNormCeiling));
    if (m >= kSmall) return;
  }
  if (m > kBig || m < kSmall) {
    st.u /= m;
    st.pu /= m;
    st.norm_sq /= m * m;
    st.dnorm_sq /= m * m;
    st.log_scale += std::log(m);
  }
}

/// Exact propagation across part of a constant segment, in chunks short
/// enough (|omega h| <= 1/2) that the Gauss rule integrates |u|^2 to
/// rounding accuracy.
template <typename Scalar>
void constant_run(const ConstantPQR<Scalar>& k, SolutionState<Scalar>& st, Scalar end,
                  bool accumulate) {
  using Complex = std::complex<Scalar>;
  const Scalar length = end - st.x;
  if (length == 0) return;
  const Complex w2 = (st.z * k.r - k.q) / k.p;
  const Scalar freq = std::sqrt(std::abs(w2));
  const Scalar chunks_real = std::ceil(std::abs(length) * freq / Scalar(0.5));
  const long chunks = std::max(1L, static_cast<long>(chunks_real));
  const Scalar h = length / Scalar(chunks);

  const auto [c_h, s_h] = cos_sinc(w2, h);
  std::array<Complex, 8> c_node, s_node;
  if (accumulate) {
    for (int j = 0; j < 8; ++j) {
      const Scalar t = h * (1 + static_cast<Scalar>(kGaussNodes[j])) / 2;
      std::tie(c_node[j], s_node[j]) = cos_sinc(w2, t);
    }
  }
  const Scalar half = std::abs(h) / 2;
  for (long n = 0; n < chunks; ++n) {
    const Complex u0 = st.u;
    const Complex pu0 = st.pu;
    if (accumulate) {
      Scalar nu = 0, nd = 0;
      for (int j = 0; j < 8; ++j) {
        const Complex u = c_node[j] * u0 + s_node[j] / k.p * pu0;
        const Complex pu = -k.p * w2 * s_node[j] * u0 + c_node[j] * pu0;
        const Scalar w = static_cast<Scalar>(kGaussWeights[j]);
        nu += w * std::norm(u);
        nd += w * std::norm(pu);
      }
      st.norm_sq += half * nu * k.r;
      st.dnorm_sq += half * nd / k.r;
    }
    st.u = c_h * u0 + s_h / k.p * pu0;
    st.pu = -k.p * w2 * s_h * u0 + c_h * pu0;
    renormalize(st);
  }
  st.x = end;
}

/// Adaptive Dormand-Prince 5(4) across part of a callable segment. The error
/// of (u, pu') is measured against a local impedance so that the two
/// components are weighed comparably whatever the size of p.
template <typename Scalar>
void callable_run(const CallablePQR<Scalar>& f, SolutionState<Scalar>& st, Scalar end, Scalar tol,
                  bool accumulate, Scalar& h_hint) {
  using Complex = std::complex<Scalar>;
  using Vec = Vector2c<Scalar>;
  struct Deriv {
    Vec dy;
    Scalar dn;
    Scalar dd;
  };

  const Complex z = st.z;
  const Scalar sign = end > st.x ? Scalar(1) : Scalar(-1);
  auto rhs = [&](Scalar x, const Vec& y) {
    const Scalar p = f.p(x), q = f.q(x), r = f.r(x);
    Deriv d;
    d.dy(0) = y(1) / p;
    d.dy(1) = (q - z * r) * y(0);
    d.dn = accumulate ? std::norm(y(0)) * r : Scalar(0);
    d.dd = accumulate ? std::norm(y(1)) / r : Scalar(0);
    return d;
  };
  auto local_rate = [&](Scalar x) {
    const Scalar p = f.p(x), q = f.q(x), r = f.r(x);
    return std::sqrt(std::max(std::abs(z * r - q) / p, Scalar(1)));
  };

  static constexpr Scalar a21 = Scalar(1) / 5;
  static constexpr Scalar a31 = Scalar(3) / 40, a32 = Scalar(9) / 40;
  static constexpr Scalar a41 = Scalar(44) / 45, a42 = Scalar(-56) / 15, a43 = Scalar(32) / 9;
  static constexpr Scalar a51 = Scalar(19372) / 6561, a52 = Scalar(-25360) / 2187,
                          a53 = Scalar(64448) / 6561, a54 = Scalar(-212) / 729;
  static constexpr Scalar a61 = Scalar(9017) / 3168, a62 = Scalar(-355) / 33,
                          a63 = Scalar(46732) / 5247, a64 = Scalar(49) / 176,
                          a65 = Scalar(-5103) / 18656;
  static constexpr Scalar b1 = Scalar(35) / 384, b3 = Scalar(500) / 1113, b4 = Scalar(125) / 192,
                          b5 = Scalar(-2187) / 6784, b6 = Scalar(11) / 84;
  static constexpr Scalar e1 = Scalar(71) / 57600, e3 = Scalar(-71) / 16695,
                          e4 = Scalar(71) / 1920, e5 = Scalar(-17253) / 339200,
                          e6 = Scalar(22) / 525, e7 = Scalar(-1) / 40;

  Scalar x = st.x;
  Vec y(st.u, st.pu);
  Scalar h = h_hint > 0 ? h_hint : Scalar(0.1) / local_rate(x);
  h = std::min(h, std::abs(end - x));
  Deriv k1 = rhs(x, y);
  bool k1_valid = true;

  while (x != end) {
    const Scalar remaining = std::abs(end - x);
    const bool last = h >= remaining;
    const Scalar step = last ? remaining : h;
    const Scalar hs = sign * step;
    if (!k1_valid) {
      k1 = rhs(x, y);
      k1_valid = true;
    }
    const Deriv k2 = rhs(x + hs / 5, y + hs * (a21 * k1.dy));
    const Deriv k3 = rhs(x + hs * Scalar(3) / 10, y + hs * (a31 * k1.dy + a32 * k2.dy));
    const Deriv k4 = rhs(x + hs * Scalar(4) / 5, y + hs * (a41 * k1.dy + a42 * k2.dy + a43 * k3.dy));
    const Deriv k5 = rhs(x + hs * Scalar(8) / 9,
                         y + hs * (a51 * k1.dy + a52 * k2.dy + a53 * k3.dy + a54 * k4.dy));
    const Scalar x_new = last ? end : x + hs;
    const Deriv k6 = rhs(x_new, y + hs * (a61 * k1.dy + a62 * k2.dy + a63 * k3.dy + a64 * k4.dy +
                                          a65 * k5.dy));
    const Vec y_new =
        y + hs * (b1 * k1.dy + b3 * k3.dy + b4 * k4.dy + b5 * k5.dy + b6 * k6.dy);
    const Deriv k7 = rhs(x_new, y_new);
    const Vec err =
        hs * (e1 * k1.dy + e3 * k3.dy + e4 * k4.dy + e5 * k5.dy + e6 * k6.dy + e7 * k7.dy);

    const Scalar p = f.p(x);
    const Scalar imp = p * local_rate(x);
    const Scalar tiny = std::numeric_limits<Scalar>::min();
    const Scalar sc_u = std::abs(y(0)) + std::abs(y(1)) / imp + tiny;
    const Scalar sc_pu = std::abs(y(1)) + imp * std::abs(y(0)) + tiny;
    const Scalar e = std::max(std::abs(err(0)) / sc_u, std::abs(err(1)) / sc_pu) / tol;

    if (e <= 1) {
      if (accumulate) {
        st.norm_sq += step * (b1 * k1.dn + b3 * k3.dn + b4 * k4.dn + b5 * k5.dn + b6 * k6.dn);
        st.dnorm_sq += step * (b1 * k1.dd + b3 * k3.dd + b4 * k4.dd + b5 * k5.dd + b6 * k6.dd);
      }
      x = x_new;
      y = y_new;
      k1 = k7;
      st.u = y(0);
      st.pu = y(1);
      const Scalar before = st.log_scale;
      renormalize(st);
      if (st.log_scale != before) {
        y = Vec(st.u, st.pu);
        k1_valid = false;
      }
      const Scalar grow = e > 0 ? Scalar(0.9) * std::pow(e, Scalar(-0.2)) : Scalar(5);
      const Scalar next = step * std::clamp(grow, Scalar(0.2), Scalar(5));
      if (!last) h = next;
      else h = std::max(h, next);
    } else {
      const Scalar shrink = std::isfinite(e) ? Scalar(0.9) * std::pow(e, Scalar(-0.25)) : Scalar(0.1);
      h = step * std::clamp(shrink, Scalar(0.1), Scalar(0.9));
      if (h < Scalar(1e-13) * std::max(Scalar(1), std::abs(x))) {
        throw Error(ErrorCode::ToleranceNotMet,
                    "step size underflow near x=" + std::to_string(static_cast<double>(x)));
      }
    }
  }
  h_hint = h;
  st.x = end;
}

/// Move `st` to x_target in either direction. Accumulated norms always grow
/// by the (positive) integral over the traversed interval.
template <typename Scalar>
void advance(const CoefficientSet<Scalar>& coeffs, SolutionState<Scalar>& st, Scalar x_target,
             Scalar tol, bool accumulate) {
  if (x_target == st.x) return;
  if (x_target < coeffs.a() || x_target > coeffs.b()) {
    throw Error(ErrorCode::OutOfDomain, "propagation target outside [a, b]");
  }
  const bool forward = x_target > st.x;
  std::size_t idx = coeffs.segment_index(st.x);
  Scalar h_hint = 0;
  while (st.x != x_target) {
    const auto& seg = coeffs.segments()[idx];
    if (!forward && st.x <= seg.lo) {
      --idx;
      h_hint = 0;
      continue;
    }
    if (forward && st.x >= seg.hi) {
      ++idx;
      h_hint = 0;
      continue;
    }
    const Scalar end = forward ? std::min(seg.hi, x_target) : std::max(seg.lo, x_target);
    if (seg.is_constant()) {
      constant_run(seg.constant(), st, end, accumulate);
    } else {
      callable_run(seg.callable(), st, end, tol, accumulate, h_hint);
    }
    st.x = end;
  }
}

}  // namespace detail

/// Propagate a solution of tau u = z u forward to x_target, updating the
/// norm accumulators. Constant segments use the closed-form propagator;
/// callable segments use adaptive stepping with local error below tol.
template <typename Scalar>
SolutionState<Scalar> propagate(const CoefficientSet<Scalar>& coeffs, SolutionState<Scalar> state,
                                Scalar x_target, Scalar tol) {
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (x_target < state.x) throw Error(ErrorCode::InvalidArgument, "propagate runs forward only");
  detail::advance(coeffs, state, x_target, tol, true);
  return state;
}

/// c and s at x: c(a) = ps'(a) = 1, s(a) = pc'(a) = 0.
template <typename Scalar>
std::pair<SolutionState<Scalar>, SolutionState<Scalar>> fundamental_pair(
    const CoefficientSet<Scalar>& coeffs, std::complex<Scalar> z, Scalar x, Scalar tol) {
  using State = SolutionState<Scalar>;
  const Scalar a = coeffs.a();
  State c = State::initial(a, z, 1, 0);
  State s = State::initial(a, z, 0, 1);
  return {propagate(coeffs, c, x, tol), propagate(coeffs, s, x, tol)};
}

/// u (pv') - (pu') v.
template <typename Scalar>
std::complex<Scalar> wronskian(const SolutionState<Scalar>& u, const SolutionState<Scalar>& v) {
  if (u.x != v.x || u.z != v.z) {
    throw Error(ErrorCode::MismatchedStates, "wronskian needs states at the same x and z");
  }
  return (u.u * v.pu - u.pu * v.u) * std::exp(u.log_scale + v.log_scale);
}

template <typename Scalar>
TransferMatrix<Scalar> transfer_matrix(const CoefficientSet<Scalar>& coeffs,
                                       std::complex<Scalar> z, Scalar x0, Scalar x1, Scalar tol) {
  using State = SolutionState<Scalar>;
  if (x1 < x0) throw Error(ErrorCode::InvalidArgument, "transfer_matrix needs x0 <= x1");
  State c = State::initial(x0, z, 1, 0);
  State s = State::initial(x0, z, 0, 1);
  detail::advance(coeffs, c, x1, tol, false);
  detail::advance(coeffs, s, x1, tol, false);
  TransferMatrix<Scalar> t;
  t.entries << c.actual_u(), s.actual_u(), c.actual_pu(), s.actual_pu();
  return t;
}

}  // namespace slspec
