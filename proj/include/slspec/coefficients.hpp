#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "slspec/error.hpp"
#include "slspec/expression.hpp"

namespace slspec {

template <typename Scalar>
struct PQR {
  Scalar p;
  Scalar q;
  Scalar r;
};

template <typename Scalar>
struct ConstantPQR {
  Scalar p;
  Scalar q;
  Scalar r;
};

/// Coefficients given by evaluators. When built from expressions the source
/// text is kept so the segment can be written back out.
template <typename Scalar>
struct CallablePQR {
  std::function<Scalar(Scalar)> p;
  std::function<Scalar(Scalar)> q;
  std::function<Scalar(Scalar)> r;
  std::string expr_p;
  std::string expr_q;
  std::string expr_r;

  bool serializable() const { return !expr_p.empty() && !expr_q.empty() && !expr_r.empty(); }

  static CallablePQR from_expressions(const std::string& p, const std::string& q,
                                      const std::string& r) {
    auto wrap = [](const std::string& s) {
      Expression e = Expression::parse(s);
      return std::function<Scalar(Scalar)>([e](Scalar x) { return e(x); });
    };
    return CallablePQR{wrap(p), wrap(q), wrap(r), p, q, r};
  }
};

template <typename Scalar>
struct Segment {
  Scalar lo;
  Scalar hi;
  std::variant<ConstantPQR<Scalar>, CallablePQR<Scalar>> kind;

  bool is_constant() const { return std::holds_alternative<ConstantPQR<Scalar>>(kind); }
  const ConstantPQR<Scalar>& constant() const { return std::get<ConstantPQR<Scalar>>(kind); }
  const CallablePQR<Scalar>& callable() const { return std::get<CallablePQR<Scalar>>(kind); }

  PQR<Scalar> eval(Scalar x) const {
    if (const auto* c = std::get_if<ConstantPQR<Scalar>>(&kind)) return {c->p, c->q, c->r};
    const auto& f = callable();
    return {f.p(x), f.q(x), f.r(x)};
  }
};

/// The coefficient triple (p, q, r) of  tau = (1/r)(-(d/dx) p (d/dx) + q)
/// on (a, b), as segments tiling the interval. Immutable once built.
/// The left endpoint is finite and regular; b may be +infinity.
template <typename Scalar>
class CoefficientSet {
 public:
  using segment_type = Segment<Scalar>;

  CoefficientSet(Scalar a, Scalar b, std::vector<segment_type> segments)
      : a_(a), b_(b), segments_(std::move(segments)) {
    validate();
  }

  Scalar a() const noexcept { return a_; }
  Scalar b() const noexcept { return b_; }
  bool infinite() const noexcept { return std::isinf(b_); }
  const std::vector<segment_type>& segments() const noexcept { return segments_; }

  /// Index of the segment containing x, with segment boundaries resolved to
  /// the segment on the right. x = b resolves to the last segment.
  std::size_t segment_index(Scalar x) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                               [](Scalar v, const segment_type& s) { return v < s.lo; });
    if (it == segments_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
  }

  /// Largest point a computation may truncate at: b itself when finite.
  Scalar truncation_cap(Scalar default_cap) const {
    return infinite() ? default_cap : b_;
  }

 private:
  [[noreturn]] static void fail(const std::string& msg) {
    throw Error(ErrorCode::InvalidCoefficients, msg);
  }

  static std::string str(Scalar v) {
    std::ostringstream os;
    os << static_cast<double>(v);
    return os.str();
  }

  static void check_values(const PQR<Scalar>& c, Scalar x) {
    if (!(c.p > 0) || !(c.r > 0)) fail("p and r must be positive (violated at x=" + str(x) + ")");
    if (!std::isfinite(c.p) || !std::isfinite(c.q) || !std::isfinite(c.r)) {
      fail("non-finite coefficient at x=" + str(x));
    }
  }

  void validate() const {
    if (!std::isfinite(a_)) fail("left endpoint a must be finite");
    if (!(b_ > a_)) fail("need a < b");
    if (segments_.empty()) fail("no segments");
    if (segments_.front().lo != a_) fail("first segment must start at a");
    if (segments_.back().hi != b_) fail("last segment must end at b");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (!(s.lo < s.hi)) fail("segment " + std::to_string(i) + " is empty or reversed");
      if (i + 1 < segments_.size() && s.hi != segments_[i + 1].lo) {
        fail("segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
             " leave a gap or overlap");
      }
      if (s.is_constant()) {
        check_values(s.eval(s.lo), s.lo);
        continue;
      }
      const auto& f = s.callable();
      if (!f.p || !f.q || !f.r) fail("callable segment " + std::to_string(i) + " lacks an evaluator");
      // Spot-check positivity and finiteness on interior samples. On an
      // infinite segment the samples stop at lo + 128, short of where
      // growing coefficients such as e^x leave the floating-point range.
      constexpr int kSamples = 17;
      const int samples = std::isinf(s.hi) ? 11 : kSamples;
      for (int k = 1; k <= samples; ++k) {
        Scalar x;
        if (std::isinf(s.hi)) {
          x = s.lo + std::ldexp(Scalar(1), k - 4);
        } else {
          x = s.lo + (s.hi - s.lo) * Scalar(k) / Scalar(kSamples + 1);
        }
        check_values(s.eval(x), x);
      }
    }
  }

  Scalar a_;
  Scalar b_;
  std::vector<segment_type> segments_;
};

/// Segment-local (p, q, r) at x; right limit at segment boundaries.
template <typename Scalar>
PQR<Scalar> eval_coefficients(const CoefficientSet<Scalar>& coeffs, Scalar x) {
  if (!(x > coeffs.a()) || !(x < coeffs.b())) {
    throw Error(ErrorCode::OutOfDomain, "x lies outside (a, b)");
  }
  return coeffs.segments()[coeffs.segment_index(x)].eval(x);
}

template <typename Scalar>
CoefficientSet<Scalar> constant_coefficients(Scalar a, Scalar b, Scalar p, Scalar q, Scalar r) {
  return CoefficientSet<Scalar>(a, b, {Segment<Scalar>{a, b, ConstantPQR<Scalar>{p, q, r}}});
}

/// p = r = 1, q = 0 on (0, infinity).
template <typename Scalar>
CoefficientSet<Scalar> free_half_line() {
  return constant_coefficients<Scalar>(0, std::numeric_limits<Scalar>::infinity(), 1, 0, 1);
}

/// A single callable segment on (a, b).
template <typename Scalar>
CoefficientSet<Scalar> callable_coefficients(Scalar a, Scalar b, std::function<Scalar(Scalar)> p,
                                             std::function<Scalar(Scalar)> q,
                                             std::function<Scalar(Scalar)> r) {
  CallablePQR<Scalar> f{std::move(p), std::move(q), std::move(r), {}, {}, {}};
  return CoefficientSet<Scalar>(a, b, {Segment<Scalar>{a, b, std::move(f)}});
}

}  // namespace slspec
