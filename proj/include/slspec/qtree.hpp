#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "slspec/coefficients.hpp"
#include "slspec/error.hpp"
#include "slspec/propagate.hpp"
#include "slspec/subordinacy.hpp"

namespace slspec {

/// A radially symmetric rooted metric tree: vertices of level n sit at
/// distance t[n] from the root and have b[n] forward edges. t[0] = 0 and
/// b[0] = 1 (the root). Levels 0..truncation_N are materialized.
template <typename Scalar>
class TreeSpec {
 public:
  TreeSpec(std::vector<Scalar> t, std::vector<std::uint64_t> b) : t_(std::move(t)), b_(std::move(b)) {
    if (t_.size() != b_.size()) throw Error(ErrorCode::InvalidTree, "t and b differ in length");
    if (t_.size() < 2) throw Error(ErrorCode::InvalidTree, "a tree needs at least two levels");
    if (t_[0] != 0) throw Error(ErrorCode::InvalidTree, "t[0] must be 0");
    if (b_[0] != 1) throw Error(ErrorCode::InvalidTree, "b[0] must be 1");
    for (std::size_t n = 1; n < t_.size(); ++n) {
      if (!(t_[n] > t_[n - 1]) || !std::isfinite(t_[n])) {
        throw Error(ErrorCode::InvalidTree, "t must be finite and strictly increasing (index " +
                                                std::to_string(n) + ")");
      }
      if (b_[n] < 1) throw Error(ErrorCode::InvalidTree, "b[" + std::to_string(n) + "] must be >= 1");
    }
  }

  /// t_n = c n, b_n = b for n >= 1. With levels = 0 the depth is the largest
  /// for which b^levels stays comfortably inside the range of Scalar.
  static TreeSpec homogeneous(std::uint64_t b, Scalar c, std::size_t levels = 0) {
    if (b < 1) throw Error(ErrorCode::InvalidTree, "b must be >= 1");
    if (!(c > 0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidTree, "c must be positive");
    if (levels == 0) levels = default_levels(b);
    std::vector<Scalar> t(levels + 1);
    std::vector<std::uint64_t> bs(levels + 1, b);
    for (std::size_t n = 0; n <= levels; ++n) t[n] = c * Scalar(n);
    bs[0] = 1;
    return TreeSpec(std::move(t), std::move(bs));
  }

  static std::size_t default_levels(std::uint64_t b) {
    constexpr std::size_t kMax = 16384;
    if (b <= 1) return kMax;
    const Scalar budget = Scalar(0.9) * std::log(std::numeric_limits<Scalar>::max());
    return std::min(kMax, static_cast<std::size_t>(budget / std::log(Scalar(b))));
  }

  const std::vector<Scalar>& t() const noexcept { return t_; }
  const std::vector<std::uint64_t>& b() const noexcept { return b_; }
  std::size_t truncation_N() const noexcept { return t_.size() - 1; }

  /// b_k >= 2 for every k >= 1.
  bool is_regular() const {
    return std::all_of(b_.begin() + 1, b_.end(), [](std::uint64_t v) { return v >= 2; });
  }

 private:
  std::vector<Scalar> t_;
  std::vector<std::uint64_t> b_;
};

/// g(t) = product of b_n over levels with t_n < t.
template <typename Scalar>
Scalar branching_function(const TreeSpec<Scalar>& tree, Scalar t) {
  const auto& ts = tree.t();
  if (t < 0 || t > ts.back()) {
    throw Error(ErrorCode::BeyondTruncation, "t outside [0, t_N]");
  }
  Scalar g = 1;
  for (std::size_t n = 0; n < ts.size() && ts[n] < t; ++n) g *= Scalar(tree.b()[n]);
  return g;
}

/// The reduced half-line operator of a radial tree.
template <typename Scalar>
struct TreeOperator {
  CoefficientSet<Scalar> coeffs;
  /// The root carries a Dirichlet condition (boundary angle 0).
  bool dirichlet_root = true;
};

/// p = r = g and q = g V on (0, t_N), one segment per edge level.
template <typename Scalar>
TreeOperator<Scalar> tree_to_sl(const TreeSpec<Scalar>& tree,
                                std::function<Scalar(Scalar)> V = nullptr) {
  const auto& ts = tree.t();
  std::vector<Segment<Scalar>> segs;
  segs.reserve(ts.size() - 1);
  Scalar g = 1;
  for (std::size_t n = 0; n + 1 < ts.size(); ++n) {
    g *= Scalar(tree.b()[n]);
    if (!std::isfinite(g)) {
      throw Error(ErrorCode::DomainOverflow,
                  "branching function overflows at level " + std::to_string(n));
    }
    if (V) {
      CallablePQR<Scalar> f{[g](Scalar) { return g; }, [g, V](Scalar x) { return g * V(x); },
                            [g](Scalar) { return g; }, {}, {}, {}};
      segs.push_back({ts[n], ts[n + 1], std::move(f)});
    } else {
      segs.push_back({ts[n], ts[n + 1], ConstantPQR<Scalar>{g, 0, g}});
    }
  }
  return {CoefficientSet<Scalar>(0, ts.back(), std::move(segs)), true};
}

struct Multiplicity {
  std::size_t k;
  double t_k;
  std::uint64_t multiplicity;
};

/// Copies of the operator restricted to (t_k, infinity) in the orthogonal
/// decomposition: b_0 ... b_{k-1} (b_k - 1) for k >= 1, and 1 for k = 0.
template <typename Scalar>
std::vector<Multiplicity> decomposition_multiplicities(const TreeSpec<Scalar>& tree,
                                                       std::size_t k_max) {
  if (k_max > tree.truncation_N()) {
    throw Error(ErrorCode::BeyondTruncation, "k_max exceeds the materialized levels");
  }
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<Multiplicity> out;
  out.push_back({0, static_cast<double>(tree.t()[0]), 1});
  std::uint64_t prefix = 1;  // b_0 ... b_{k-1}
  for (std::size_t k = 1; k <= k_max; ++k) {
    const std::uint64_t prev = tree.b()[k - 1];
    if (prefix > kMax / prev) throw Error(ErrorCode::DomainOverflow, "multiplicity overflows 64 bits");
    prefix *= prev;
    const std::uint64_t extra = tree.b()[k] - 1;
    if (extra != 0 && prefix > kMax / extra) {
      throw Error(ErrorCode::DomainOverflow, "multiplicity overflows 64 bits");
    }
    out.push_back({k, static_cast<double>(tree.t()[k]), prefix * extra});
  }
  return out;
}

/// One period of the homogeneous tree in the chart acting on the column
/// (u', u): free propagation over length c, then u' divided by b at the
/// vertex,
///   M = [[cos(c k) / b, -k sin(c k) / b], [sin(c k) / k, cos(c k)]],
/// k = sqrt(z). det M = 1/b. Entire in z, so z = 0 needs no special case.
template <typename Scalar>
Matrix2c<Scalar> homogeneous_transfer_matrix(std::uint64_t b, Scalar c, std::complex<Scalar> z) {
  if (b < 1 || !(c > 0)) throw Error(ErrorCode::InvalidArgument, "need b >= 1 and c > 0");
  const auto [cs, sinc] = detail::cos_sinc(z, c);
  const Scalar bb = Scalar(b);
  Matrix2c<Scalar> m;
  m << cs / bb, -z * sinc / bb, sinc, cs;
  return m;
}

/// alpha(z) = log(kappa + sqrt(kappa^2 - 1)), kappa = (1+b)/(2 sqrt b) cos(c sqrt z),
/// with the root chosen so that Re alpha >= 0. e^{+-alpha} are the
/// eigenvalues of sqrt(b) M(z). The imaginary part is the principal one.
template <typename Scalar>
std::complex<Scalar> floquet_exponent(std::uint64_t b, Scalar c, std::complex<Scalar> z) {
  using Complex = std::complex<Scalar>;
  if (b < 1 || !(c > 0)) throw Error(ErrorCode::InvalidArgument, "need b >= 1 and c > 0");
  const Scalar bb = Scalar(b);
  const Complex cs = detail::cos_sinc(z, c).first;
  const Complex kappa = (1 + bb) / (2 * std::sqrt(bb)) * cs;
  const Complex root = std::sqrt(kappa * kappa - Scalar(1));
  Complex w = kappa + root;
  if (std::abs(w) < 1) w = kappa - root;
  return std::log(w);
}

template <typename Scalar>
struct BandSpectrum {
  Scalar theta;
  std::vector<std::pair<Scalar, Scalar>> bands;
  std::vector<Scalar> point_spectrum;
  std::uint64_t b;
  Scalar c;
  std::size_t l_max;
};

/// theta = arccos(2 / (sqrt b + 1/sqrt b)).
template <typename Scalar>
Scalar band_theta(std::uint64_t b) {
  const Scalar sb = std::sqrt(Scalar(b));
  return std::acos(std::min(Scalar(1), 2 / (sb + 1 / sb)));
}

/// Bands [((pi(l-1) + theta)/c)^2, ((pi l - theta)/c)^2] and eigenvalues
/// (pi l / c)^2 for l = 1..l_max.
template <typename Scalar>
BandSpectrum<Scalar> band_spectrum(std::uint64_t b, Scalar c, std::size_t l_max) {
  if (b < 1 || !(c > 0) || l_max < 1) {
    throw Error(ErrorCode::InvalidArgument, "need b >= 1, c > 0 and l_max >= 1");
  }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  BandSpectrum<Scalar> out{band_theta<Scalar>(b), {}, {}, b, c, l_max};
  for (std::size_t l = 1; l <= l_max; ++l) {
    const Scalar lo = (pi * Scalar(l - 1) + out.theta) / c;
    const Scalar hi = (pi * Scalar(l) - out.theta) / c;
    const Scalar pt = pi * Scalar(l) / c;
    out.bands.emplace_back(lo * lo, hi * hi);
    out.point_spectrum.push_back(pt * pt);
  }
  return out;
}

/// Band edges located as the roots of |tr(sqrt(b) M(lambda))| = 2 on each
/// monotone arc of cos(c sqrt(lambda)), by bisection in s = c sqrt(lambda).
/// Bands are listed while their lower edge does not exceed lambda_hi.
template <typename Scalar>
BandSpectrum<Scalar> band_spectrum_numeric(std::uint64_t b, Scalar c, Scalar lambda_hi, Scalar tol) {
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (b < 1 || !(c > 0)) throw Error(ErrorCode::InvalidArgument, "need b >= 1 and c > 0");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar sb = std::sqrt(Scalar(b));
  // |half trace| - 1 as a function of s; <= 0 inside bands.
  auto excess = [&](Scalar s) {
    const Scalar lambda = (s / c) * (s / c);
    const auto m = homogeneous_transfer_matrix<Scalar>(b, c, std::complex<Scalar>(lambda, 0));
    return std::abs(sb * m.trace().real()) / 2 - 1;
  };
  // Root of `excess` on [lo, hi] where it changes sign.
  auto bisect = [&](Scalar lo, Scalar hi) {
    const bool rising = excess(lo) < excess(hi);
    for (int it = 0; it < 400; ++it) {
      const Scalar mid = lo + (hi - lo) / 2;
      if (mid <= lo || mid >= hi) break;
      const Scalar span = (hi / c) * (hi / c) - (lo / c) * (lo / c);
      if (span <= tol / 16) break;
      const bool inside = excess(mid) <= 0;
      if (inside == rising) lo = mid;
      else hi = mid;
    }
    return lo + (hi - lo) / 2;
  };

  BandSpectrum<Scalar> out{band_theta<Scalar>(b), {}, {}, b, c, 0};
  for (std::size_t l = 1;; ++l) {
    const Scalar s0 = pi * Scalar(l - 1), s2 = pi * Scalar(l), s1 = (s0 + s2) / 2;
    Scalar lo_s, hi_s;
    if (b == 1) {
      lo_s = s0;
      hi_s = s2;
    } else {
      lo_s = bisect(s0, s1);
      hi_s = bisect(s1, s2);
    }
    const Scalar lo = (lo_s / c) * (lo_s / c);
    if (lo > lambda_hi) break;
    out.bands.emplace_back(lo, (hi_s / c) * (hi_s / c));
    out.point_spectrum.push_back((s2 / c) * (s2 / c));
    out.l_max = l;
  }
  return out;
}

template <typename Scalar>
struct TreeScanPolicy {
  ClassifyPolicy<Scalar> classify;
  /// Right end of the boundedness window for growth_checks.
  Scalar growth_X = 64;
  Scalar growth_ceiling = Scalar(1e3);
};

template <typename Scalar>
struct TreeScanEntry {
  SubordinacyVerdict<Scalar> verdict;
  GrowthReport<Scalar> growth;
  /// InN together with bounded sqrt(g) u for both fundamental solutions.
  bool ac_evidence;
};

template <typename Scalar>
TreeScanEntry<Scalar> tree_ac_point(const TreeOperator<Scalar>& op, Scalar lambda,
                                    const TreeScanPolicy<Scalar>& policy = {}) {
  TreeScanEntry<Scalar> e{classify_lambda(op.coeffs, lambda, policy.classify),
                          growth_checks(op.coeffs, lambda, std::min(policy.growth_X, op.coeffs.b()),
                                        policy.classify.tol, policy.growth_ceiling),
                          false};
  e.ac_evidence = e.verdict.kind == Verdict::InN && e.growth.bounded_u;
  return e;
}

template <typename Scalar>
std::vector<TreeScanEntry<Scalar>> tree_ac_scan(const TreeOperator<Scalar>& op,
                                                const std::vector<Scalar>& lambda_grid,
                                                const TreeScanPolicy<Scalar>& policy = {}) {
  std::vector<TreeScanEntry<Scalar>> out;
  out.reserve(lambda_grid.size());
  for (Scalar lambda : lambda_grid) out.push_back(tree_ac_point(op, lambda, policy));
  return out;
}

}  // namespace slspec
