#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "slspec/coefficients.hpp"
#include "slspec/error.hpp"
#include "slspec/propagate.hpp"
#include "slspec/quadrature.hpp"
#include "slspec/subordinacy.hpp"

namespace slspec {

/// q = q1 + q2 with q1 integrable at infinity and q2 slowly varying; q2'
/// is supplied by the caller.
template <typename Scalar>
struct QSplit {
  std::function<Scalar(Scalar)> q1;
  std::function<Scalar(Scalar)> q2;
  std::function<Scalar(Scalar)> q2_prime;

  /// q1 = q, q2 = 0.
  static QSplit integrable(const CoefficientSet<Scalar>& coeffs) {
    auto q = [coeffs](Scalar x) { return detail::coefficients_at(coeffs, x).q; };
    auto zero = [](Scalar) { return Scalar(0); };
    return {q, zero, zero};
  }
};

/// Partial integrals over [c, X] of the defects that must be integrable on
/// (c, infinity) for the coefficients to be asymptotically Schrodinger.
template <typename Scalar>
struct WeidmannHypotheses {
  Scalar c;
  Scalar l1_p_defect;
  Scalar l1_r_defect;
  Scalar q1_l1;
  Scalar q2_prime_l1;
  Scalar q2_limit_estimate;
  Scalar X;
};

namespace detail {

template <typename Scalar, typename F>
Scalar integrate_plain(F f, Scalar lo, Scalar hi) {
  if (!(lo < hi)) return 0;
  return boost::math::quadrature::gauss_kronrod<Scalar, 31>::integrate(f, lo, hi, 15,
                                                                      Scalar(1e-12));
}

}  // namespace detail

template <typename Scalar>
std::vector<WeidmannHypotheses<Scalar>> hypotheses_scan(const CoefficientSet<Scalar>& coeffs,
                                                        const QSplit<Scalar>& split, Scalar c,
                                                        const std::vector<Scalar>& X_list) {
  std::vector<WeidmannHypotheses<Scalar>> out;
  Scalar prev = c;
  WeidmannHypotheses<Scalar> acc{c, 0, 0, 0, 0, 0, c};
  for (Scalar X : X_list) {
    if (X < prev || X > coeffs.b() || c < coeffs.a()) {
      throw Error(ErrorCode::OutOfDomain, "X_list must ascend from c within the domain");
    }
    acc.l1_p_defect += detail::integrate_coefficients(
        coeffs, prev, X, [](Scalar, Scalar p, Scalar, Scalar) { return std::abs(1 - 1 / p); });
    acc.l1_r_defect += detail::integrate_coefficients(
        coeffs, prev, X, [](Scalar, Scalar, Scalar, Scalar r) { return std::abs(1 - r); });
    acc.q1_l1 += detail::integrate_plain([&](Scalar x) { return std::abs(split.q1(x)); }, prev, X);
    acc.q2_prime_l1 +=
        detail::integrate_plain([&](Scalar x) { return std::abs(split.q2_prime(x)); }, prev, X);
    acc.q2_limit_estimate = split.q2(X);
    acc.X = X;
    out.push_back(acc);
    prev = X;
  }
  return out;
}

/// True when the increments of `values` never grow over the final three
/// steps: the numerical sign of a convergent integral.
template <typename Scalar>
bool flattening(const std::vector<Scalar>& values, Scalar slack = Scalar(1e-12)) {
  if (values.size() < 3) return false;
  const std::size_t n = values.size();
  const std::size_t from = n >= 4 ? n - 4 : 0;
  for (std::size_t i = from + 1; i < n; ++i) {
    if (values[i] < values[i - 1] - slack) return false;
  }
  for (std::size_t i = from + 2; i < n; ++i) {
    const Scalar d1 = values[i - 1] - values[i - 2];
    const Scalar d2 = values[i] - values[i - 1];
    if (d2 > d1 + slack) return false;
  }
  return true;
}

template <typename Scalar>
struct HMonitorResult {
  std::vector<Scalar> x;
  /// h along the grid for c and s.
  std::vector<Scalar> h_c;
  std::vector<Scalar> h_s;
  Scalar variation_c;
  Scalar variation_s;
  /// Larger of the two tail variations of ln h.
  Scalar log_h_variation_tail;
};

namespace detail {

template <typename Scalar>
Scalar tail_variation(const std::vector<Scalar>& h) {
  Scalar v = 0;
  for (std::size_t i = h.size() / 2 + 1; i < h.size(); ++i) {
    v += std::abs(std::log(h[i]) - std::log(h[i - 1]));
  }
  return v;
}

}  // namespace detail

/// h = (lambda - q2) u^2 + (pu')^2 for c and s along x_grid, and the total
/// variation of ln h over the second half of the grid.
template <typename Scalar>
HMonitorResult<Scalar> h_monitor(const CoefficientSet<Scalar>& coeffs,
                                 const std::function<Scalar(Scalar)>& q2, Scalar lambda,
                                 const std::vector<Scalar>& x_grid, Scalar tol) {
  using State = SolutionState<Scalar>;
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "h_monitor needs lambda > 0");
  HMonitorResult<Scalar> out;
  const std::complex<Scalar> z(lambda, 0);
  State c = State::initial(coeffs.a(), z, 1, 0);
  State s = State::initial(coeffs.a(), z, 0, 1);
  for (Scalar x : x_grid) {
    const Scalar weight = lambda - q2(x);
    if (!(weight > 0)) {
      throw Error(ErrorCode::NonpositiveH,
                  "lambda - q2 <= 0 at x=" + std::to_string(static_cast<double>(x)));
    }
    c = propagate(coeffs, c, x, tol);
    s = propagate(coeffs, s, x, tol);
    auto h = [&](const State& st) {
      const Scalar u = st.actual_u().real(), pu = st.actual_pu().real();
      return weight * u * u + pu * pu;
    };
    out.x.push_back(x);
    out.h_c.push_back(h(c));
    out.h_s.push_back(h(s));
  }
  out.variation_c = detail::tail_variation(out.h_c);
  out.variation_s = detail::tail_variation(out.h_s);
  out.log_h_variation_tail = std::max(out.variation_c, out.variation_s);
  return out;
}

template <typename Scalar>
struct WeidmannPolicy {
  ClassifyPolicy<Scalar> classify;
  /// Start of the asymptotic region.
  Scalar c = 1;
  /// Upper limits of the hypothesis integrals.
  std::vector<Scalar> X_list = ClassifyPolicy<Scalar>::geometric_grid(Scalar(4), Scalar(1024));
  /// Grid for h: x_h_lo, x_h_lo + x_h_step, ... <= x_h_hi.
  Scalar x_h_lo = 1;
  Scalar x_h_hi = 60;
  Scalar x_h_step = Scalar(0.25);
  Scalar variation_threshold = Scalar(1e-3);
};

template <typename Scalar>
struct WeidmannEntry {
  SubordinacyVerdict<Scalar> verdict;
  /// ln h tail variation; NaN when lambda - q2 fails to be positive.
  Scalar h_tail_variation;
};

template <typename Scalar>
struct WeidmannReport {
  std::vector<WeidmannEntry<Scalar>> entries;
  std::vector<WeidmannHypotheses<Scalar>> hypotheses;
  /// Integrability of 1 - 1/p, 1 - r, q1, q2' and decay of q2.
  bool schrodinger_set_passed = false;
  /// Uniform local bounds: q_- / r, I_- > 0 and finite gamma.
  bool local_set_passed = false;
  CriteriaReport<Scalar> local_bounds;
  Scalar fraction_in_n = std::numeric_limits<Scalar>::quiet_NaN();
  /// Every lambda classified InN with h flattening below threshold.
  bool pass = false;
};

namespace detail {

template <typename Scalar>
std::vector<Scalar> h_grid(const CoefficientSet<Scalar>& coeffs, const WeidmannPolicy<Scalar>& policy) {
  std::vector<Scalar> grid;
  const long count =
      static_cast<long>(std::floor((policy.x_h_hi - policy.x_h_lo) / policy.x_h_step + Scalar(1e-9)));
  for (long k = 0; k <= count; ++k) {
    const Scalar x = policy.x_h_lo + policy.x_h_step * Scalar(k);
    if (x > coeffs.a() && x <= coeffs.b()) grid.push_back(x);
  }
  return grid;
}

}  // namespace detail

/// Both hypothesis scans, without any classification.
template <typename Scalar>
WeidmannReport<Scalar> weidmann_hypotheses(const CoefficientSet<Scalar>& coeffs,
                                           const QSplit<Scalar>& split,
                                           const WeidmannPolicy<Scalar>& policy = {}) {
  WeidmannReport<Scalar> rep;
  std::vector<Scalar> X_list;
  for (Scalar X : policy.X_list) {
    if (X > policy.c && X <= coeffs.b()) X_list.push_back(X);
  }
  rep.hypotheses = hypotheses_scan(coeffs, split, policy.c, X_list);
  auto column = [&](auto field) {
    std::vector<Scalar> v;
    for (const auto& h : rep.hypotheses) v.push_back(h.*field);
    return v;
  };
  using H = WeidmannHypotheses<Scalar>;
  bool q2_decays = !rep.hypotheses.empty();
  for (std::size_t i = 1; i < rep.hypotheses.size(); ++i) {
    if (std::abs(rep.hypotheses[i].q2_limit_estimate) >
        std::abs(rep.hypotheses[i - 1].q2_limit_estimate) + Scalar(1e-12)) {
      q2_decays = false;
    }
  }
  rep.schrodinger_set_passed = flattening(column(&H::l1_p_defect)) &&
                               flattening(column(&H::l1_r_defect)) &&
                               flattening(column(&H::q1_l1)) &&
                               flattening(column(&H::q2_prime_l1)) && q2_decays;

  if (!X_list.empty()) {
    const Scalar lo = coeffs.a() + 1;
    const Scalar hi = X_list.back() - 1;
    if (hi > lo) {
      const Scalar mid = lo + (hi - lo) / 2;
      const auto half = criteria_scan(coeffs, Scalar(0), lo, mid, Scalar(0.5));
      rep.local_bounds = criteria_scan(coeffs, Scalar(0), lo, hi, Scalar(0.5));
      auto stable = [](Scalar first, Scalar full) {
        return std::isfinite(full) && full <= first * Scalar(1.1) + Scalar(1e-12);
      };
      rep.local_set_passed = rep.local_bounds.i_minus > 0 &&
                             stable(half.gamma_sup, rep.local_bounds.gamma_sup) &&
                             stable(half.qminus_sup, rep.local_bounds.qminus_sup);
    }
  }
  return rep;
}

/// Classification and ln h tail variation at one lambda.
template <typename Scalar>
WeidmannEntry<Scalar> weidmann_entry(const CoefficientSet<Scalar>& coeffs,
                                     const QSplit<Scalar>& split, Scalar lambda,
                                     const WeidmannPolicy<Scalar>& policy = {}) {
  WeidmannEntry<Scalar> e{classify_lambda(coeffs, lambda, policy.classify),
                          std::numeric_limits<Scalar>::quiet_NaN()};
  try {
    e.h_tail_variation = h_monitor(coeffs, split.q2, lambda, detail::h_grid(coeffs, policy),
                                   policy.classify.tol)
                             .log_h_variation_tail;
  } catch (const Error& err) {
    if (err.code() != ErrorCode::NonpositiveH && err.code() != ErrorCode::InvalidArgument) throw;
  }
  return e;
}

/// Sets fraction_in_n and pass from the entries.
template <typename Scalar>
void summarize(WeidmannReport<Scalar>& rep, const WeidmannPolicy<Scalar>& policy) {
  if (rep.entries.empty()) {
    rep.fraction_in_n = std::numeric_limits<Scalar>::quiet_NaN();
    rep.pass = false;
    return;
  }
  std::size_t in_n = 0;
  bool all_flat = true;
  for (const auto& e : rep.entries) {
    if (e.verdict.kind == Verdict::InN) ++in_n;
    if (!(e.h_tail_variation < policy.variation_threshold)) all_flat = false;
  }
  rep.fraction_in_n = Scalar(in_n) / Scalar(rep.entries.size());
  rep.pass = in_n == rep.entries.size() && all_flat;
}

/// Classifies every lambda > 0 of the grid and checks the prediction that
/// all of them lie in N, with both hypothesis sets recorded as evidence.
/// An empty grid gives an empty report.
template <typename Scalar>
WeidmannReport<Scalar> weidmann_report(const CoefficientSet<Scalar>& coeffs,
                                       const QSplit<Scalar>& split,
                                       const std::vector<Scalar>& lambda_grid,
                                       const WeidmannPolicy<Scalar>& policy = {}) {
  if (lambda_grid.empty()) return {};
  WeidmannReport<Scalar> rep = weidmann_hypotheses(coeffs, split, policy);
  for (Scalar lambda : lambda_grid) rep.entries.push_back(weidmann_entry(coeffs, split, lambda, policy));
  summarize(rep, policy);
  return rep;
}

}  // namespace slspec
