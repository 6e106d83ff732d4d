#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <tuple>
#include <utility>
#include <vector>

#include "slspec/coefficients.hpp"
#include "slspec/error.hpp"
#include "slspec/propagate.hpp"
#include "slspec/quadrature.hpp"
#include "slspec/weyl.hpp"

namespace slspec {

/// Bounds of the ratio |m(lambda + i eps)| ||s|| / ||c|| under the eps-x
/// pairing: 5 -+ sqrt(24), the roots of (1 - t)^2 = 8 t.
template <typename Scalar>
std::pair<Scalar, Scalar> jl_bounds() {
  const Scalar r = std::sqrt(Scalar(24));
  return {Scalar(5) - r, Scalar(5) + r};
}

/// eps = (2 ||s(lambda)||_(a,x) ||c(lambda)||_(a,x))^{-1}. The log norms are
/// kept so that pairs deep in a gap, where eps underflows, stay usable.
template <typename Scalar>
struct EpsXPair {
  Scalar lambda;
  Scalar x;
  Scalar eps;
  Scalar s_norm;
  Scalar c_norm;
  Scalar log_s_norm;
  Scalar log_c_norm;

  Scalar log_eps() const { return -std::numbers::ln2_v<Scalar> - log_s_norm - log_c_norm; }
  /// ||s|| / ||c||
  Scalar norm_ratio() const { return std::exp(log_s_norm - log_c_norm); }
};

enum class Verdict { InN, SubordinateDirichlet, SubordinateOther, Inconclusive };

constexpr const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::InN: return "InN";
    case Verdict::SubordinateDirichlet: return "SubordinateDirichlet";
    case Verdict::SubordinateOther: return "SubordinateOther";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

namespace detail {

template <typename Scalar>
EpsXPair<Scalar> make_eps_pair(Scalar lambda, const SolutionState<Scalar>& c,
                               const SolutionState<Scalar>& s) {
  if (!(s.norm_sq > 0)) throw Error(ErrorCode::DegenerateNorm, "||s||_(a,x) vanishes");
  EpsXPair<Scalar> e;
  e.lambda = lambda;
  e.x = s.x;
  e.log_s_norm = s.log_norm();
  e.log_c_norm = c.log_norm();
  e.s_norm = std::exp(e.log_s_norm);
  e.c_norm = std::exp(e.log_c_norm);
  e.eps = std::exp(e.log_eps());
  return e;
}

template <typename Scalar>
void check_interior(const CoefficientSet<Scalar>& coeffs, Scalar x) {
  if (!(x > coeffs.a()) || x > coeffs.b() || !std::isfinite(x)) {
    throw Error(ErrorCode::OutOfDomain, "x must lie in (a, b)");
  }
}

}  // namespace detail

template <typename Scalar>
EpsXPair<Scalar> eps_from_x(const CoefficientSet<Scalar>& coeffs, Scalar lambda, Scalar x,
                            Scalar tol) {
  detail::check_interior(coeffs, x);
  const auto [c, s] = fundamental_pair(coeffs, std::complex<Scalar>(lambda, 0), x, tol);
  return detail::make_eps_pair(lambda, c, s);
}

/// Inverts eps_lambda(x) by bracketing and bisection; the map is strictly
/// decreasing. Propagation restarts from the lower bracket, never from a.
template <typename Scalar>
EpsXPair<Scalar> x_from_eps(const CoefficientSet<Scalar>& coeffs, Scalar lambda, Scalar eps,
                            Scalar tol, Scalar x_max = Scalar(1 << 20)) {
  using State = SolutionState<Scalar>;
  if (!(eps > 0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const Scalar a = coeffs.a();
  const Scalar cap = std::min(coeffs.truncation_cap(x_max), x_max);
  const std::complex<Scalar> z(lambda, 0);
  State c_lo = State::initial(a, z, 1, 0);
  State s_lo = State::initial(a, z, 0, 1);

  auto at = [&](Scalar x, State& c, State& s) {
    c = propagate(coeffs, c_lo, x, tol);
    s = propagate(coeffs, s_lo, x, tol);
    return detail::make_eps_pair(lambda, c, s);
  };

  State c_hi, s_hi;
  Scalar x_hi = std::min(a + 1, cap);
  EpsXPair<Scalar> hi = at(x_hi, c_hi, s_hi);
  while (hi.eps > eps) {
    if (x_hi >= cap) {
      throw Error(ErrorCode::RangeExceeded, "required x exceeds the truncation limit");
    }
    c_lo = c_hi;
    s_lo = s_hi;
    x_hi = std::min(a + 2 * (x_hi - a), cap);
    hi = at(x_hi, c_hi, s_hi);
  }
  if (std::abs(hi.eps - eps) <= tol * eps) return hi;

  EpsXPair<Scalar> best = hi;
  for (int iter = 0; iter < 200; ++iter) {
    const Scalar x_lo = c_lo.x;
    const Scalar mid = x_lo + (x_hi - x_lo) / 2;
    if (mid <= x_lo || mid >= x_hi) break;
    State c_mid, s_mid;
    const EpsXPair<Scalar> e = at(mid, c_mid, s_mid);
    if (std::abs(e.eps - eps) < std::abs(best.eps - eps)) best = e;
    if (std::abs(e.eps - eps) <= tol * eps) return e;
    if (e.eps > eps) {
      c_lo = c_mid;
      s_lo = s_mid;
    } else {
      x_hi = mid;
    }
  }
  return best;
}

template <typename Scalar>
struct JLSample {
  Scalar x;
  Scalar eps;
  /// |m(lambda + i eps)| ||s||_(a,x) / ||c||_(a,x)
  Scalar t;
  std::complex<Scalar> m;
  Scalar X;
  Scalar radius;
  bool converged;
};

/// The JL ratio at x, with m evaluated at lambda + i eps_lambda(x) and the
/// truncation doubled until the Weyl radius is below rel_tol |m|.
template <typename Scalar>
JLSample<Scalar> jl_ratio(const CoefficientSet<Scalar>& coeffs, Scalar lambda, Scalar x,
                          Scalar tol, Scalar rel_tol = Scalar(1e-6),
                          Scalar x_max = Scalar(1 << 17)) {
  const EpsXPair<Scalar> e = eps_from_x(coeffs, lambda, x, tol);
  const Scalar a = coeffs.a();
  const Scalar cap = coeffs.truncation_cap(x_max);
  const std::complex<Scalar> z(lambda, e.eps);
  const auto est = m_function_converged(coeffs, z, std::min(a + 2 * (x - a), cap), cap, rel_tol, tol);
  return {x, e.eps, std::abs(est.m) * e.norm_ratio(), est.m, est.X, est.radius, est.converged};
}

template <typename Scalar>
struct ClassifyPolicy {
  /// Ascending x values; the eps-x pairing turns each into an m sample.
  std::vector<Scalar> x_grid = geometric_grid(Scalar(2), Scalar(1024));
  Scalar delta = Scalar(1e-3);
  Scalar delta_sub = Scalar(1e-3);
  Scalar tol = Scalar(1e-10);
  /// Target Weyl radius relative to |m| for each m sample.
  Scalar m_rel_tol = Scalar(1e-3);
  /// Truncation limit when b is infinite.
  Scalar x_max = Scalar(1 << 17);
  /// Relative spread allowed among the last three Im m samples.
  Scalar stabilization = Scalar(0.1);
  Scalar jl_slack = Scalar(1e-3);
  /// A subordinate direction closer than this (unit vector, u component) to
  /// the Dirichlet one counts as Dirichlet.
  Scalar dirichlet_angle = Scalar(1e-6);

  static std::vector<Scalar> geometric_grid(Scalar lo, Scalar hi, Scalar factor = 2) {
    std::vector<Scalar> g;
    for (Scalar x = lo; x <= hi * (1 + Scalar(1e-12)); x *= factor) g.push_back(x);
    return g;
  }
};

template <typename Scalar>
struct RatioSample {
  Scalar x;
  Scalar s_over_c;
  /// ||v||_(a,x) / ||w||_(a,x) for the candidate subordinate solution v and
  /// a partner w with W[v, w] = 1.
  Scalar candidate_ratio;
};

template <typename Scalar>
struct MSample {
  Scalar x;
  Scalar eps;
  std::complex<Scalar> m;
  Scalar radius;
  Scalar jl;
  bool valid;
};

template <typename Scalar>
struct SubordinacyVerdict {
  Scalar lambda;
  Verdict kind = Verdict::Inconclusive;
  std::vector<RatioSample<Scalar>> ratio_trace;
  std::vector<MSample<Scalar>> m_trace;
  ClassifyPolicy<Scalar> thresholds;
  Scalar im_m_extrapolated = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar jl_min = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar jl_max = std::numeric_limits<Scalar>::quiet_NaN();
  /// Unit boundary data (v(a), pv'(a)) of the candidate subordinate solution.
  Scalar candidate_u = 0;
  Scalar candidate_pu = 0;
  bool im_m_stable = false;
  bool ratio_decays = false;
};

/// Numerical subordinacy classification of a real lambda.
///
/// Two independent lines of evidence are gathered on the x grid:
///  * m(lambda + i eps) along the eps-x pairing, with the JL ratio;
///  * a candidate subordinate solution found by propagating backward from
///    twice the last grid point (a decaying solution dominates there), and
///    the ratio of its norm to that of a partner solution.
/// A ratio that falls monotonically below delta_sub over the final decade
/// of the grid marks a subordinate solution. Otherwise lambda is in N when
/// the last three Im m samples agree within `stabilization` inside
/// (delta, 1/delta) and every JL ratio lies within its bounds.
template <typename Scalar>
SubordinacyVerdict<Scalar> classify_lambda(const CoefficientSet<Scalar>& coeffs, Scalar lambda,
                                           const ClassifyPolicy<Scalar>& policy = {}) {
  using State = SolutionState<Scalar>;
  using Complex = std::complex<Scalar>;
  SubordinacyVerdict<Scalar> out;
  out.lambda = lambda;
  out.thresholds = policy;

  const Scalar a = coeffs.a();
  const Scalar cap = coeffs.truncation_cap(policy.x_max);
  std::vector<Scalar> grid;
  for (Scalar x : policy.x_grid) {
    if (x > a && x - a <= (cap - a) / 2) grid.push_back(x);
  }
  if (grid.empty()) return out;
  const Scalar tol = policy.tol;
  const Complex z(lambda, 0);

  // Fundamental pair along the grid.
  std::vector<EpsXPair<Scalar>> pairs;
  {
    State c = State::initial(a, z, 1, 0);
    State s = State::initial(a, z, 0, 1);
    for (Scalar x : grid) {
      c = propagate(coeffs, c, x, tol);
      s = propagate(coeffs, s, x, tol);
      pairs.push_back(detail::make_eps_pair(lambda, c, s));
    }
  }

  // m along the eps-x pairing.
  const auto [jl_lo, jl_hi] = jl_bounds<Scalar>();
  bool jl_ok = true;
  for (const auto& e : pairs) {
    MSample<Scalar> ms{e.x, e.eps, Complex(0), 0, 0, false};
    if (e.eps > 0 && std::isfinite(e.eps)) {
      try {
        const auto est = m_function_converged(coeffs, Complex(lambda, e.eps), a + 2 * (e.x - a),
                                              cap, policy.m_rel_tol, tol);
        ms.m = est.m;
        ms.radius = est.radius;
        ms.valid = true;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::TruncationUnstable) throw;
        ms.m = Complex(std::numeric_limits<Scalar>::infinity(), 0);
      }
      ms.jl = std::abs(ms.m) * e.norm_ratio();
      if (ms.valid) {
        out.jl_min = std::isnan(out.jl_min) ? ms.jl : std::min(out.jl_min, ms.jl);
        out.jl_max = std::isnan(out.jl_max) ? ms.jl : std::max(out.jl_max, ms.jl);
        if (ms.jl < jl_lo - policy.jl_slack || ms.jl > jl_hi + policy.jl_slack) jl_ok = false;
      }
    }
    out.m_trace.push_back(ms);
  }

  // Candidate subordinate solution from backward propagation. Of the two
  // starts, the one that grows more carries the backward-dominant solution.
  const Scalar x_back = a + 2 * (grid.back() - a);
  using Tails = std::vector<std::pair<Scalar, Scalar>>;  // (norm_sq, log_scale)
  auto backward = [&](Scalar u0, Scalar pu0, Tails& tails) {
    State st = State::initial(x_back, z, u0, pu0);
    tails.resize(grid.size());
    for (std::size_t i = grid.size(); i-- > 0;) {
      detail::advance(coeffs, st, grid[i], tol, true);
      tails[i] = {st.norm_sq, st.log_scale};
    }
    detail::advance(coeffs, st, a, tol, true);
    return st;
  };
  Tails tails, tails_alt;
  State v = backward(1, 0, tails);
  const State v_alt = backward(0, 1, tails_alt);
  if (v_alt.log_norm() > v.log_norm()) {
    v = v_alt;
    tails.swap(tails_alt);
  }
  const Scalar dir_u = v.u.real();
  const Scalar dir_pu = v.pu.real();
  const Scalar n = std::hypot(dir_u, dir_pu);
  out.candidate_u = dir_u / n;
  out.candidate_pu = dir_pu / n;

  State w = State::initial(a, z, -out.candidate_pu, out.candidate_u);
  const Scalar tiny = std::numeric_limits<Scalar>::min();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    w = propagate(coeffs, w, grid[i], tol);
    const Scalar part =
        v.norm_sq - tails[i].first * std::exp(2 * (tails[i].second - v.log_scale));
    const Scalar log_v = Scalar(0.5) * std::log(std::max(part, tiny)) - std::log(n);
    out.ratio_trace.push_back(
        {grid[i], pairs[i].norm_ratio(), std::exp(log_v - w.log_norm())});
  }

  // Decay over the final decade of the grid.
  const Scalar decade_start = a + (grid.back() - a) / 10;
  std::vector<Scalar> tail_ratios;
  for (const auto& r : out.ratio_trace) {
    if (r.x >= decade_start) tail_ratios.push_back(r.candidate_ratio);
  }
  bool monotone = tail_ratios.size() >= 2;
  for (std::size_t i = 1; i < tail_ratios.size(); ++i) {
    if (tail_ratios[i] > tail_ratios[i - 1] * (1 + Scalar(1e-9))) monotone = false;
  }
  const bool small = !tail_ratios.empty() && tail_ratios.back() < policy.delta_sub;
  out.ratio_decays = monotone && small;

  // Stabilization of Im m over the last three valid samples.
  std::vector<Scalar> im;
  for (const auto& ms : out.m_trace) {
    if (ms.valid) im.push_back(ms.m.imag());
  }
  if (!im.empty()) out.im_m_extrapolated = im.back();
  if (im.size() >= 3) {
    const Scalar i0 = im[im.size() - 3], i1 = im[im.size() - 2], i2 = im[im.size() - 1];
    const Scalar lo = std::min({i0, i1, i2}), hi = std::max({i0, i1, i2});
    out.im_m_stable = lo > policy.delta && hi < 1 / policy.delta &&
                      hi <= lo * (1 + policy.stabilization);
  }

  if (out.ratio_decays) {
    out.kind = std::abs(out.candidate_u) <= policy.dirichlet_angle ? Verdict::SubordinateDirichlet
                                                                   : Verdict::SubordinateOther;
  } else if (small) {
    // Below threshold but not monotone: the limit is not visible yet.
    out.kind = Verdict::Inconclusive;
  } else if (out.im_m_stable && jl_ok) {
    out.kind = Verdict::InN;
  } else {
    out.kind = Verdict::Inconclusive;
  }
  return out;
}

/// Boundary data at a of a solution: Dirichlet is s, Neumann is c.
template <typename Scalar>
struct SolutionSelector {
  std::complex<Scalar> u0;
  std::complex<Scalar> pu0;

  static SolutionSelector dirichlet() { return {0, 1}; }
  static SolutionSelector neumann() { return {1, 0}; }
  /// s_beta: (-sin beta, cos beta).
  static SolutionSelector angle(Scalar beta) { return {-std::sin(beta), std::cos(beta)}; }
};

template <typename Scalar>
struct DerivativeBound {
  Scalar lhs;
  Scalar rhs;
  bool holds;
};

/// Both sides of the local derivative estimate at x:
///   (pu')(x)^2 / r(x)  <=  gamma(x) int [2/(P(x) r) + |q/r - lambda|]^2
///                          * int u^2 r,
/// integrals over [x-1, x+1], P(x) = int_{x-1/2}^{x+1/2} 1/p and
/// gamma = sup r / inf r over [x-1, x+1].
template <typename Scalar>
DerivativeBound<Scalar> derivative_bound_check(const CoefficientSet<Scalar>& coeffs, Scalar lambda,
                                               const SolutionSelector<Scalar>& u, Scalar x,
                                               Scalar tol) {
  using State = SolutionState<Scalar>;
  if (!(x - 1 > coeffs.a()) || !(x + 1 < coeffs.b())) {
    throw Error(ErrorCode::WindowOutOfDomain, "[x-1, x+1] must lie inside (a, b)");
  }
  if (u.u0.imag() != 0 || u.pu0.imag() != 0) {
    throw Error(ErrorCode::NonRealSolution, "the estimate is stated for real solutions");
  }
  const std::complex<Scalar> z(lambda, 0);
  State st = State::initial(coeffs.a(), z, u.u0, u.pu0);
  st = propagate(coeffs, st, x - 1, tol);
  const Scalar n_left = st.actual_norm_sq();
  st = propagate(coeffs, st, x, tol);
  const Scalar pu_x = st.actual_pu().real();
  st = propagate(coeffs, st, x + 1, tol);
  const Scalar local_norm = st.actual_norm_sq() - n_left;

  const Scalar r_x = detail::coefficients_at(coeffs, x).r;
  const Scalar lhs = pu_x * pu_x / r_x;

  const Scalar P = detail::integrate_coefficients(
      coeffs, x - Scalar(0.5), x + Scalar(0.5), [](Scalar, Scalar p, Scalar, Scalar) { return 1 / p; });
  const auto [r_minus, r_plus] = detail::r_extrema(coeffs, x - 1, x + 1);
  const Scalar gamma = r_plus / r_minus;
  const Scalar bracket = detail::integrate_coefficients(
      coeffs, x - 1, x + 1, [&](Scalar, Scalar, Scalar q, Scalar r) {
        const Scalar v = 2 / (P * r) + std::abs(q / r - lambda);
        return v * v;
      });
  const Scalar rhs = gamma * bracket * local_norm;
  return {lhs, rhs, lhs <= rhs * (1 + tol)};
}

template <typename Scalar>
struct CriteriaReport {
  Scalar gamma_sup = 0;
  /// sup of P(x)^{-2} int_{x-1}^{x+1} r^{-2}
  Scalar p_term_sup = 0;
  /// sup of int_{x-1}^{x+1} |q/r - lambda|^2
  Scalar q_term_sup = 0;
  /// sup of int_x^{x+1} q_-/r
  Scalar qminus_sup = 0;
  /// inf of int_x^{x+1} r/p
  Scalar i_minus = std::numeric_limits<Scalar>::infinity();
  bool r_monotone = true;
  std::pair<Scalar, Scalar> scan_range{};
  std::size_t points = 0;
};

/// Window quantities behind the derivative bound and the Stolz-type
/// conditions, on the grid x_lo, x_lo + step, ... <= x_hi. Grid points whose
/// window [x-1, x+1] leaves [a, b] are skipped; scan_range reports the span
/// actually covered.
template <typename Scalar>
CriteriaReport<Scalar> criteria_scan(const CoefficientSet<Scalar>& coeffs, Scalar lambda,
                                     Scalar x_lo, Scalar x_hi, Scalar step) {
  if (!(step > 0) || !(x_lo < x_hi)) {
    throw Error(ErrorCode::InvalidArgument, "criteria_scan needs x_lo < x_hi and step > 0");
  }
  CriteriaReport<Scalar> rep;
  const Scalar a = coeffs.a(), b = coeffs.b();
  Scalar first = std::numeric_limits<Scalar>::quiet_NaN(), last = first;
  Scalar prev_r = -std::numeric_limits<Scalar>::infinity();
  auto note_r = [&](Scalar r) {
    if (r < prev_r * (1 - Scalar(1e-14))) rep.r_monotone = false;
    prev_r = std::max(prev_r, r);
  };
  const long count = static_cast<long>(std::floor((x_hi - x_lo) / step + Scalar(1e-9))) + 1;
  for (long k = 0; k < count; ++k) {
    const Scalar x = x_lo + step * Scalar(k);
    if (x - 1 < a || x + 1 > b) continue;
    if (std::isnan(first)) first = x;
    last = x;
    ++rep.points;
    const Scalar P = detail::integrate_coefficients(
        coeffs, x - Scalar(0.5), x + Scalar(0.5), [](Scalar, Scalar p, Scalar, Scalar) { return 1 / p; });
    const auto [r_minus, r_plus] = detail::r_extrema(coeffs, x - 1, x + 1);
    rep.gamma_sup = std::max(rep.gamma_sup, r_plus / r_minus);
    const Scalar inv_r2 = detail::integrate_coefficients(
        coeffs, x - 1, x + 1, [](Scalar, Scalar, Scalar, Scalar r) { return 1 / (r * r); });
    rep.p_term_sup = std::max(rep.p_term_sup, inv_r2 / (P * P));
    rep.q_term_sup = std::max(rep.q_term_sup,
                              detail::integrate_coefficients(
                                  coeffs, x - 1, x + 1, [&](Scalar, Scalar, Scalar q, Scalar r) {
                                    const Scalar d = q / r - lambda;
                                    return d * d;
                                  }));
    rep.qminus_sup = std::max(rep.qminus_sup,
                              detail::integrate_coefficients(
                                  coeffs, x, x + 1, [](Scalar, Scalar, Scalar q, Scalar r) {
                                    return std::max(-q, Scalar(0)) / r;
                                  }));
    rep.i_minus = std::min(rep.i_minus,
                           detail::integrate_coefficients(
                               coeffs, x, x + 1,
                               [](Scalar, Scalar p, Scalar, Scalar r) { return r / p; }));
  }
  rep.scan_range = {first, last};
  if (rep.points > 0) {
    // r non-decreasing across the covered windows.
    const Scalar lo = first - 1, hi = last + 1;
    constexpr int kPerUnit = 32;
    const long samples = std::max(2L, static_cast<long>(std::ceil((hi - lo) * kPerUnit)));
    // (x, side, r): at a segment boundary the left limit (side 0) precedes
    // the right-hand values (side 1).
    std::vector<std::tuple<Scalar, int, Scalar>> pts;
    for (long k = 0; k <= samples; ++k) {
      const Scalar x = lo + (hi - lo) * Scalar(k) / Scalar(samples);
      pts.emplace_back(x, 1, detail::coefficients_at(coeffs, x).r);
    }
    const auto& segs = coeffs.segments();
    for (std::size_t i = 1; i < segs.size(); ++i) {
      const Scalar x = segs[i].lo;
      if (x < lo || x > hi) continue;
      pts.emplace_back(x, 0, segs[i - 1].eval(x).r);
      pts.emplace_back(x, 1, segs[i].eval(x).r);
    }
    std::stable_sort(pts.begin(), pts.end(), [](const auto& l, const auto& r) {
      return std::tie(std::get<0>(l), std::get<1>(l)) < std::tie(std::get<0>(r), std::get<1>(r));
    });
    for (const auto& p : pts) note_r(std::get<2>(p));
  }
  return rep;
}

template <typename Scalar>
struct SolutionGrowth {
  Scalar sup_sqrt_r_u;
  Scalar sup_pu_over_sqrt_r;
  /// Least-squares slope of ||u||^2_(a,x) against x over the final half.
  Scalar c3;
  /// RMS residual of that fit relative to the mean of ||u||^2.
  Scalar c3_residual;
};

template <typename Scalar>
struct GrowthReport {
  bool bounded_u;
  bool bounded_du;
  /// Smaller of the two fundamental solutions' slopes.
  Scalar linear_growth_c3;
  SolutionGrowth<Scalar> c;
  SolutionGrowth<Scalar> s;
};

namespace detail {

template <typename Scalar>
SolutionGrowth<Scalar> measure_growth(const CoefficientSet<Scalar>& coeffs, Scalar lambda, Scalar X,
                                      Scalar tol, Scalar sample_step,
                                      std::complex<Scalar> u0, std::complex<Scalar> pu0) {
  using State = SolutionState<Scalar>;
  const Scalar a = coeffs.a();
  State st = State::initial(a, std::complex<Scalar>(lambda, 0), u0, pu0);
  SolutionGrowth<Scalar> g{0, 0, 0, 0};
  std::vector<Scalar> xs, ns;
  const long count = std::max(2L, static_cast<long>(std::ceil((X - a) / sample_step)));
  for (long k = 0; k <= count; ++k) {
    const Scalar x = k == count ? X : a + (X - a) * Scalar(k) / Scalar(count);
    st = propagate(coeffs, st, x, tol);
    const Scalar r = coefficients_at(coeffs, x).r;
    const Scalar sr = std::sqrt(r);
    g.sup_sqrt_r_u = std::max(g.sup_sqrt_r_u, sr * std::abs(st.actual_u()));
    g.sup_pu_over_sqrt_r = std::max(g.sup_pu_over_sqrt_r, std::abs(st.actual_pu()) / sr);
    if (!std::isfinite(st.actual_u().real()) || !std::isfinite(st.actual_pu().real())) {
      g.sup_sqrt_r_u = std::numeric_limits<Scalar>::infinity();
    }
    if (x - a >= (X - a) / 2) {
      xs.push_back(x);
      ns.push_back(st.actual_norm_sq());
    }
  }
  const std::size_t n = xs.size();
  Scalar mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ns[i];
  }
  mx /= Scalar(n);
  my /= Scalar(n);
  Scalar sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ns[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  g.c3 = sxy / sxx;
  Scalar rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Scalar e = ns[i] - (my + g.c3 * (xs[i] - mx));
    rss += e * e;
  }
  g.c3_residual = std::sqrt(rss / Scalar(n)) / std::abs(my);
  if (!std::isfinite(g.c3)) g.c3 = std::numeric_limits<Scalar>::infinity();
  return g;
}

}  // namespace detail

/// Boundedness of sqrt(r) u and pu'/sqrt(r) on [a, X] for c and s, against
/// `ceiling`, and the linear growth rate of ||u||^2_(a,x).
template <typename Scalar>
GrowthReport<Scalar> growth_checks(const CoefficientSet<Scalar>& coeffs, Scalar lambda, Scalar X,
                                   Scalar tol, Scalar ceiling = Scalar(1e3),
                                   Scalar sample_step = Scalar(1) / 32) {
  detail::check_interior(coeffs, X);
  GrowthReport<Scalar> rep;
  rep.c = detail::measure_growth(coeffs, lambda, X, tol, sample_step, std::complex<Scalar>(1),
                                 std::complex<Scalar>(0));
  rep.s = detail::measure_growth(coeffs, lambda, X, tol, sample_step, std::complex<Scalar>(0),
                                 std::complex<Scalar>(1));
  const Scalar r_a = detail::coefficients_at(coeffs, coeffs.a()).r;
  const Scalar ref = std::max({Scalar(1), std::sqrt(r_a), 1 / std::sqrt(r_a)});
  const Scalar limit = ceiling * ref;
  rep.bounded_u = rep.c.sup_sqrt_r_u <= limit && rep.s.sup_sqrt_r_u <= limit;
  rep.bounded_du = rep.c.sup_pu_over_sqrt_r <= limit && rep.s.sup_pu_over_sqrt_r <= limit;
  rep.linear_growth_c3 = std::min(rep.c.c3, rep.s.c3);
  return rep;
}

}  // namespace slspec
