#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "slspec/coefficients.hpp"
#include "slspec/propagate.hpp"

using namespace slspec;
using Complex = std::complex<double>;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

CoefficientSet<double> free_callable() {
  return callable_coefficients<double>(
      0, kInf, [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 1.0; });
}

// p = 1 on [0, 1), p = 4 on [1, inf); q = 0, r = 1.
CoefficientSet<double> jump_operator() {
  return CoefficientSet<double>(0, kInf,
                                {{0, 1, ConstantPQR<double>{1, 0, 1}},
                                 {1, kInf, ConstantPQR<double>{4, 0, 1}}});
}

}  // namespace

TEST_CASE("free half-line fundamental pair matches cos and sin") {
  const auto coeffs = free_half_line<double>();
  for (double lambda : {0.25, 1.0, 7.5}) {
    const double k = std::sqrt(lambda);
    for (double x : {0.3, 2.0, 17.0, 60.0}) {
      const auto [c, s] = fundamental_pair(coeffs, Complex(lambda, 0), x, 1e-12);
      CHECK(c.actual_u().real() == doctest::Approx(std::cos(k * x)).epsilon(1e-11));
      CHECK(c.actual_pu().real() == doctest::Approx(-k * std::sin(k * x)).epsilon(1e-11));
      CHECK(s.actual_u().real() == doctest::Approx(std::sin(k * x) / k).epsilon(1e-11));
      CHECK(s.actual_pu().real() == doctest::Approx(std::cos(k * x)).epsilon(1e-11));
      // int_0^x sin^2(kt)/k^2 dt
      const double s_norm = (x / 2 - std::sin(2 * k * x) / (4 * k)) / lambda;
      CHECK(s.actual_norm_sq() == doctest::Approx(s_norm).epsilon(1e-11));
      const double c_norm = x / 2 + std::sin(2 * k * x) / (4 * k);
      CHECK(c.actual_norm_sq() == doctest::Approx(c_norm).epsilon(1e-11));
    }
  }
}

TEST_CASE("zero spectral parameter gives polynomial solutions") {
  const auto coeffs = free_half_line<double>();
  const auto [c, s] = fundamental_pair(coeffs, Complex(0, 0), 2.0, 1e-12);
  CHECK(s.actual_u().real() == doctest::Approx(2.0));
  CHECK(s.actual_pu().real() == doctest::Approx(1.0));
  CHECK(s.actual_norm_sq() == doctest::Approx(8.0 / 3.0));
  CHECK(c.actual_u().real() == doctest::Approx(1.0));
}

TEST_CASE("callable and constant segments agree") {
  const auto exact = free_half_line<double>();
  const auto numeric = free_callable();
  for (Complex z : {Complex(1, 0), Complex(3, 0.5), Complex(-2, 0)}) {
    const auto [c1, s1] = fundamental_pair(exact, z, 12.0, 1e-12);
    const auto [c2, s2] = fundamental_pair(numeric, z, 12.0, 1e-12);
    const double scale = std::abs(s1.actual_u()) + std::abs(s1.actual_pu());
    CHECK(std::abs(s1.actual_u() - s2.actual_u()) / scale < 1e-8);
    CHECK(std::abs(c1.actual_pu() - c2.actual_pu()) / (std::abs(c1.actual_pu()) + 1) < 1e-8);
    CHECK(s2.actual_norm_sq() == doctest::Approx(s1.actual_norm_sq()).epsilon(1e-8));
  }
}

TEST_CASE("quasi-derivative is continuous across a jump in p") {
  const auto coeffs = jump_operator();
  const double lambda = 2.0;
  const double k1 = std::sqrt(lambda);      // p = 1
  const double k2 = std::sqrt(lambda / 4);  // p = 4
  // s: u = sin(k1 x)/k1 on [0, 1]; afterwards A cos(k2 (x-1)) + B sin(k2 (x-1))
  // with u(1) = A and 4 u'(1+) = 4 k2 B = cos(k1).
  const double A = std::sin(k1) / k1;
  const double B = std::cos(k1) / (4 * k2);
  for (double x : {0.5, 1.0, 3.0, 9.0}) {
    const auto s = propagate(coeffs, SolutionState<double>::initial(0, Complex(lambda, 0), 0, 1), x, 1e-12);
    double u, pu;
    if (x <= 1) {
      u = std::sin(k1 * x) / k1;
      pu = std::cos(k1 * x);
    } else {
      u = A * std::cos(k2 * (x - 1)) + B * std::sin(k2 * (x - 1));
      pu = 4 * k2 * (-A * std::sin(k2 * (x - 1)) + B * std::cos(k2 * (x - 1)));
    }
    CHECK(s.actual_u().real() == doctest::Approx(u).epsilon(1e-11));
    CHECK(s.actual_pu().real() == doctest::Approx(pu).epsilon(1e-11));
  }
}

TEST_CASE("Wronskian is conserved along oscillating solutions") {
  const auto coeffs = CoefficientSet<double>(
      0, kInf,
      {{0, 2.5, ConstantPQR<double>{1, 1, 2}},
       {2.5, 6, CallablePQR<double>::from_expressions("1 + 0.5*sin(x)", "exp(-x)", "2 + cos(x)")},
       {6, kInf, ConstantPQR<double>{3, -1, 0.5}}});
  for (double lambda : {1.0, 4.0, 9.0}) {
    auto c = SolutionState<double>::initial(0, Complex(lambda, 0), 1, 0);
    auto s = SolutionState<double>::initial(0, Complex(lambda, 0), 0, 1);
    for (double x = 5; x <= 100; x += 5) {
      c = propagate(coeffs, c, x, 1e-12);
      s = propagate(coeffs, s, x, 1e-12);
      CHECK(std::abs(wronskian(c, s) - Complex(1)) < 1e-9);
    }
  }
}

TEST_CASE("Wronskian and transfer determinant are conserved") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> re(-5, 10), im(-2, 2);
  const auto coeffs = CoefficientSet<double>(
      0, kInf,
      {{0, 2.5, ConstantPQR<double>{1, 1, 2}},
       {2.5, 6, CallablePQR<double>::from_expressions("1 + 0.5*sin(x)", "exp(-x)", "2 + cos(x)")},
       {6, kInf, ConstantPQR<double>{3, -1, 0.5}}});
  for (int trial = 0; trial < 10; ++trial) {
    const Complex z(re(rng), im(rng));
    const auto [c, s] = fundamental_pair(coeffs, z, 30.0, 1e-12);
    // Off the real axis c and s grow, so W = 1 is read off a difference of
    // products of size |c||s|.
    const double size = std::hypot(std::abs(c.actual_u()), std::abs(c.actual_pu())) *
                        std::hypot(std::abs(s.actual_u()), std::abs(s.actual_pu()));
    CHECK(std::abs(wronskian(c, s) - Complex(1)) < 1e-9 * std::max(1.0, size));
    const auto t = transfer_matrix(coeffs, z, 1.0, 20.0, 1e-12);
    CHECK(std::abs(t.det() - Complex(1)) < 1e-8 * std::max(1.0, t.entries.norm()));
  }
}

TEST_CASE("exponentially growing solutions stay representable") {
  const auto coeffs = free_half_line<double>();
  const auto [c, s] = fundamental_pair(coeffs, Complex(-1, 0), 2000.0, 1e-12);
  // c = cosh x, ||c||^2 ~ e^{2x}/8 for large x.
  CHECK(c.log_norm() == doctest::Approx(2000 - 0.5 * std::log(8.0)).epsilon(1e-12));
  CHECK(std::isinf(std::exp(c.log_norm())));
  // pu/u = tanh x and u/pu = coth x, both 1 in double at x = 2000.
  CHECK(std::abs(c.pu / c.u - 1.0) < 1e-12);
  CHECK(std::abs(s.u / s.pu - 1.0) < 1e-12);
}

TEST_CASE("long double state carries the same closed forms") {
  const auto coeffs = free_half_line<long double>();
  const auto [c, s] = fundamental_pair(coeffs, std::complex<long double>(4, 0), 10.0L, 1e-14L);
  CHECK(static_cast<double>(s.actual_u().real()) == doctest::Approx(std::sin(20.0) / 2).epsilon(1e-13));
}

TEST_CASE("coefficient validation") {
  using S = Segment<double>;
  CHECK_THROWS_AS(CoefficientSet<double>(0, 1, {S{0, 1, ConstantPQR<double>{-1, 0, 1}}}), Error);
  CHECK_THROWS_AS(CoefficientSet<double>(0, 2, {S{0, 1, ConstantPQR<double>{1, 0, 1}},
                                                S{1.5, 2, ConstantPQR<double>{1, 0, 1}}}),
                  Error);
  CHECK_THROWS_AS(CoefficientSet<double>(-kInf, 1, {S{-kInf, 1, ConstantPQR<double>{1, 0, 1}}}), Error);
  try {
    callable_coefficients<double>(
        0, 1, [](double) { return 1.0; }, [](double) { return 0.0; }, [](double x) { return x - 0.5; });
    FAIL("expected InvalidCoefficients");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidCoefficients);
  }
}

TEST_CASE("evaluation and propagation errors") {
  const auto coeffs = jump_operator();
  CHECK(eval_coefficients(coeffs, 1.0).p == 4);
  CHECK(eval_coefficients(coeffs, 0.999).p == 1);
  try {
    eval_coefficients(coeffs, -1.0);
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDomain);
  }
  const auto st = SolutionState<double>::initial(5, Complex(1, 0), 1, 0);
  CHECK_THROWS_AS(propagate(coeffs, st, 2.0, 1e-10), Error);
  CHECK_THROWS_AS(propagate(coeffs, st, 6.0, 0.0), Error);
  const auto other = SolutionState<double>::initial(4, Complex(1, 0), 1, 0);
  try {
    wronskian(st, other);
    FAIL("expected MismatchedStates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MismatchedStates);
  }
}
