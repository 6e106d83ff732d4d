#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "slspec/qtree.hpp"

using namespace slspec;
using L = long double;
using Complex = std::complex<double>;

namespace {

const double kPi = std::numbers::pi;

const TreeOperator<L>& tree2() {
  static const TreeOperator<L> op = tree_to_sl(TreeSpec<L>::homogeneous(2, 1));
  return op;
}

}  // namespace

TEST_CASE("tree validation") {
  CHECK_THROWS_AS(TreeSpec<double>({0, 1, 1}, {1, 2, 2}), Error);
  CHECK_THROWS_AS(TreeSpec<double>({0.5, 1}, {1, 2}), Error);
  CHECK_THROWS_AS(TreeSpec<double>({0, 1}, {2, 2}), Error);
  CHECK_FALSE(TreeSpec<double>({0, 1, 2}, {1, 1, 2}).is_regular());
  CHECK(TreeSpec<double>({0, 1, 2}, {1, 3, 2}).is_regular());
  CHECK(TreeSpec<L>::homogeneous(2, 1).truncation_N() > 10000);
  CHECK(TreeSpec<double>::homogeneous(2, 1).truncation_N() < 1024);
}

TEST_CASE("branching function") {
  const auto t = TreeSpec<double>::homogeneous(2, 1, 10);
  CHECK(branching_function(t, 1.5) == 2);
  CHECK(branching_function(t, 2.5) == 4);
  CHECK(branching_function(t, 0.3) == 1);
  CHECK(branching_function(t, 1.0) == 1);
  CHECK(branching_function(t, 0.0) == 1);
  try {
    branching_function(t, 10.5);
    FAIL("expected BeyondTruncation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BeyondTruncation);
  }
}

TEST_CASE("reduction to a weighted half-line operator") {
  const auto op = tree_to_sl(TreeSpec<double>::homogeneous(2, 1, 12));
  CHECK(op.dirichlet_root);
  REQUIRE(op.coeffs.segments().size() == 12);
  for (std::size_t n = 0; n < 12; ++n) {
    const auto& s = op.coeffs.segments()[n];
    CHECK(s.lo == double(n));
    CHECK(s.constant().p == std::ldexp(1.0, static_cast<int>(n)));
    CHECK(s.constant().r == s.constant().p);
    CHECK(s.constant().q == 0);
  }
  const auto flat = tree_to_sl(TreeSpec<double>::homogeneous(1, 1, 5));
  for (const auto& s : flat.coeffs.segments()) CHECK(s.constant().p == 1);

  const auto with_v = tree_to_sl<double>(TreeSpec<double>::homogeneous(2, 1, 6),
                                         [](double x) { return std::exp(-x); });
  CHECK(eval_coefficients(with_v.coeffs, 2.5).q == doctest::Approx(4 * std::exp(-2.5)));
}

TEST_CASE("decomposition multiplicities") {
  const auto h = decomposition_multiplicities(TreeSpec<double>::homogeneous(2, 1, 5), 3);
  REQUIRE(h.size() == 4);
  CHECK(h[0].multiplicity == 1);
  CHECK(h[1].multiplicity == 1);
  CHECK(h[2].multiplicity == 2);
  CHECK(h[3].multiplicity == 4);
  const auto t = decomposition_multiplicities(TreeSpec<double>({0, 1, 2}, {1, 3, 2}), 2);
  CHECK(t[1].multiplicity == 2);
  CHECK(t[2].multiplicity == 3);
  CHECK_THROWS_AS(decomposition_multiplicities(TreeSpec<double>::homogeneous(2, 1, 5), 6), Error);
  CHECK_THROWS_AS(decomposition_multiplicities(TreeSpec<double>::homogeneous(2, 1, 80), 70), Error);
}

TEST_CASE("telescoping of multiplicities") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> bd(2, 5), depth(2, 12);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = depth(rng);
    std::vector<double> t(n + 1);
    std::vector<std::uint64_t> b(n + 1);
    for (int k = 0; k <= n; ++k) {
      t[k] = k == 0 ? 0 : t[k - 1] + 0.5 + 0.1 * k;
      b[k] = k == 0 ? 1 : bd(rng);
    }
    const TreeSpec<double> tree(t, b);
    const auto m = decomposition_multiplicities(tree, n);
    std::uint64_t sum = 0, prod = 1;
    for (int k = 0; k <= n; ++k) {
      sum += m[k].multiplicity;
      prod *= b[k];
      CHECK(sum == prod);
    }
  }
}

TEST_CASE("homogeneous transfer matrix") {
  const auto m = homogeneous_transfer_matrix<double>(2, 1, Complex(kPi * kPi, 0));
  CHECK(std::abs(m(0, 0) + 0.5) < 1e-15);
  CHECK(std::abs(m(0, 1)) < 1e-14);
  CHECK(std::abs(m(1, 0)) < 1e-15);
  CHECK(std::abs(m(1, 1) + 1.0) < 1e-15);
  for (Complex z : {Complex(0, 0), Complex(3, 1), Complex(-2, 0.5)}) {
    for (std::uint64_t b : {1, 2, 5}) {
      CHECK(std::abs(homogeneous_transfer_matrix<double>(b, 1.3, z).determinant() - 1.0 / double(b)) < 1e-12);
    }
  }
  // b = 1: free rotation acting on (u', u).
  const double k = 1.7, c = 0.8;
  const auto r = homogeneous_transfer_matrix<double>(1, c, Complex(k * k, 0));
  CHECK(std::abs(r(0, 0) - std::cos(k * c)) < 1e-14);
  CHECK(std::abs(r(0, 1) + k * std::sin(k * c)) < 1e-14);
  CHECK(std::abs(r(1, 0) - std::sin(k * c) / k) < 1e-14);
  // z = 0: free propagation of a line.
  const auto z0 = homogeneous_transfer_matrix<double>(3, 2.0, Complex(0, 0));
  CHECK(std::abs(z0(1, 0) - 2.0) < 1e-15);
  CHECK(std::abs(z0(0, 0) - 1.0 / 3) < 1e-15);
}

TEST_CASE("monodromy agrees with the propagated transfer matrix") {
  const auto op = tree_to_sl(TreeSpec<double>::homogeneous(3, 1.5, 8));
  for (Complex z : {Complex(2, 0), Complex(5, 0.7), Complex(-1, 0.2)}) {
    // From just after the root vertex to just after the first vertex.
    const auto t = transfer_matrix(op.coeffs, z, 0.0, 1.5, 1e-12).entries;
    // (u, pu') -> (u', u) with p = 1 before and p = 3 after.
    Matrix2c<double> a0, a1;
    a0 << 0, 1.0, 1, 0;
    a1 << 0, 1.0 / 3, 1, 0;
    const Matrix2c<double> m = a1 * t * a0.inverse();
    const auto expected = homogeneous_transfer_matrix<double>(3, 1.5, z);
    CHECK((m - expected).norm() < 1e-10);
    // Largest eigenvalue of sqrt(b) M has modulus e^{Re alpha}.
    const Eigen::ComplexEigenSolver<Matrix2c<double>> es(std::sqrt(3.0) * expected);
    const double big = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(1)));
    CHECK(std::log(big) == doctest::Approx(floquet_exponent<double>(3, 1.5, z).real()).epsilon(1e-10));
  }
}

TEST_CASE("Floquet exponent") {
  const auto a = floquet_exponent<double>(2, 1, Complex(kPi * kPi, 0));
  CHECK(a.real() == doctest::Approx(std::log(std::sqrt(2.0))).epsilon(1e-12));
  CHECK(std::abs(std::abs(a.imag()) - kPi) < 1e-12);
  CHECK(std::abs(floquet_exponent<double>(2, 1, Complex(4, 0)).real()) < 1e-14);
  const auto free = floquet_exponent<double>(1, 0.5, Complex(2, 0));
  CHECK(std::abs(free.real()) < 1e-14);
  CHECK(std::abs(free.imag()) == doctest::Approx(0.5 * std::sqrt(2.0)));
  CHECK(floquet_exponent<double>(2, 1, Complex(3, 2)).real() >= 0);
}

TEST_CASE("closed-form bands") {
  const auto bs = band_spectrum<double>(2, 1, 3);
  CHECK(bs.theta == doctest::Approx(0.339837).epsilon(1e-6));
  CHECK(bs.bands[0].first == doctest::Approx(0.115489).epsilon(1e-5));
  CHECK(bs.bands[0].second == doctest::Approx(7.849833).epsilon(1e-6));
  CHECK(bs.bands[1].first == doctest::Approx(12.120351).epsilon(1e-6));
  CHECK(bs.point_spectrum[0] > bs.bands[0].second);
  CHECK(bs.point_spectrum[0] < bs.bands[1].first);

  const auto one = band_spectrum<double>(1, 1, 4);
  CHECK(one.theta == 0);
  for (std::size_t l = 1; l < 4; ++l) CHECK(one.bands[l].first == one.bands[l - 1].second);

  const auto scaled = band_spectrum<double>(3, 2.0, 4), unit = band_spectrum<double>(3, 1.0, 4);
  for (std::size_t l = 0; l < 4; ++l) {
    CHECK(scaled.bands[l].first == doctest::Approx(unit.bands[l].first / 4));
    CHECK(scaled.bands[l].second == doctest::Approx(unit.bands[l].second / 4));
  }
  CHECK_THROWS_AS(band_spectrum<double>(2, 1, 0), Error);
}

TEST_CASE("numeric band edges agree with the closed form") {
  for (std::uint64_t b : {2, 3, 4}) {
    for (double c : {0.5, 1.0, 2.0}) {
      const auto exact = band_spectrum<double>(b, c, 5);
      const auto numeric = band_spectrum_numeric<double>(
          b, c, (exact.bands[4].first + exact.bands[4].second) / 2, 1e-10);
      REQUIRE(numeric.bands.size() >= 5);
      for (std::size_t l = 0; l < 5; ++l) {
        CHECK(std::abs(numeric.bands[l].first - exact.bands[l].first) < 1e-8);
        CHECK(std::abs(numeric.bands[l].second - exact.bands[l].second) < 1e-8);
      }
      // Re alpha vanishes inside bands and is positive inside gaps.
      for (std::size_t l = 0; l < 4; ++l) {
        const double mid_band = (numeric.bands[l].first + numeric.bands[l].second) / 2;
        const double mid_gap = (numeric.bands[l].second + numeric.bands[l + 1].first) / 2;
        CHECK(std::abs(floquet_exponent<double>(b, c, Complex(mid_band, 0)).real()) < 1e-12);
        CHECK(floquet_exponent<double>(b, c, Complex(mid_gap, 0)).real() > 1e-3);
      }
    }
  }
  const auto flat = band_spectrum_numeric<double>(1, 1, 100, 1e-10);
  for (std::size_t l = 0; l < flat.bands.size(); ++l) {
    CHECK(flat.bands[l].second == (kPi * double(l + 1)) * (kPi * double(l + 1)));
  }
}

TEST_CASE("band and gap solutions on the b=2 tree") {
  const auto& op = tree2();
  // Band interior: sqrt(g) u stays bounded.
  const auto in = growth_checks<L>(op.coeffs, 4, 60, 1e-12L);
  CHECK(in.bounded_u);
  // Gap: sqrt(g) |s| grows by e^{Re alpha} per period.
  const double rate = floquet_exponent<double>(2, 1, Complex(9, 0)).real();
  using State = SolutionState<L>;
  State s = State::initial(0, std::complex<L>(9, 0), 0, 1);
  std::vector<double> amp;
  for (int n = 20; n <= 30; ++n) {
    s = propagate(op.coeffs, s, L(n) + 0.5L, 1e-12L);
    const L g = branching_function(TreeSpec<L>::homogeneous(2, 1, 40), L(n) + 0.5L);
    amp.push_back(static_cast<double>(std::log(std::sqrt(g) * std::abs(s.u)) + s.log_scale));
  }
  const double observed = (amp.back() - amp.front()) / 10;
  CHECK(observed == doctest::Approx(rate).epsilon(0.01));
}

TEST_CASE("point spectrum eigenfunction decays cell by cell") {
  const auto& op = tree2();
  const L lambda = std::numbers::pi_v<L> * std::numbers::pi_v<L>;
  using State = SolutionState<L>;
  State s = State::initial(0, std::complex<L>(lambda, 0), 0, 1);
  L prev = 0, prev_inc = 0;
  for (int n = 1; n <= 12; ++n) {
    s = propagate(op.coeffs, s, L(n), 1e-12L);
    const L total = s.actual_norm_sq();
    const L inc = total - prev;
    if (n > 2) CHECK(static_cast<double>(inc / prev_inc) == doctest::Approx(0.5).epsilon(0.1));
    prev = total;
    prev_inc = inc;
  }
  const auto v = classify_lambda(op.coeffs, lambda);
  CHECK(v.kind == Verdict::SubordinateDirichlet);
}

TEST_CASE("tree scan") {
  const auto& op = tree2();
  TreeScanPolicy<L> policy;
  const auto rows = tree_ac_scan<L>(op, {4, 9}, policy);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].verdict.kind == Verdict::InN);
  CHECK(rows[0].growth.bounded_u);
  CHECK(rows[0].ac_evidence);
  CHECK(rows[1].verdict.kind != Verdict::InN);
  CHECK_FALSE(rows[1].ac_evidence);
}
