#include <doctest.h>

#include <cmath>

#include "slspec/weidmann.hpp"

using namespace slspec;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

CoefficientSet<double> decaying_potential() {
  return callable_coefficients<double>(
      0, kInf, [](double) { return 1.0; }, [](double x) { return std::exp(-x); },
      [](double) { return 1.0; });
}

}  // namespace

TEST_CASE("hypothesis integrals against exact values") {
  const auto coeffs = decaying_potential();
  const auto split = QSplit<double>::integrable(coeffs);
  const auto h = hypotheses_scan(coeffs, split, 1.0, {2.0, 4.0, 8.0, 16.0, 32.0});
  REQUIRE(h.size() == 5);
  for (const auto& e : h) {
    CHECK(e.q1_l1 == doctest::Approx(std::exp(-1.0) - std::exp(-e.X)).epsilon(1e-10));
    CHECK(e.l1_p_defect == 0);
    CHECK(e.l1_r_defect == 0);
    CHECK(e.q2_prime_l1 == 0);
  }
  std::vector<double> q1;
  for (const auto& e : h) q1.push_back(e.q1_l1);
  CHECK(flattening(q1));

  const auto p_defect = callable_coefficients<double>(
      0, kInf, [](double x) { return 1 + std::exp(-x); }, [](double) { return 0.0; },
      [](double) { return 1.0; });
  const auto hp = hypotheses_scan(p_defect, QSplit<double>::integrable(p_defect), 1.0, {64.0});
  // |1 - 1/p| = e^{-x} / (1 + e^{-x})
  CHECK(hp[0].l1_p_defect == doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-9));

  QSplit<double> slow{[](double) { return 0.0; }, [](double x) { return 1 / (1 + x); },
                      [](double x) { return -1 / ((1 + x) * (1 + x)); }};
  const auto hs = hypotheses_scan(free_half_line<double>(), slow, 1.0, {10.0, 1000.0});
  CHECK(hs[1].q2_prime_l1 == doctest::Approx(0.5 - 1.0 / 1001).epsilon(1e-10));
  CHECK(hs[1].q2_limit_estimate == doctest::Approx(1.0 / 1001));
}

TEST_CASE("flattening detects growing increments") {
  CHECK(flattening(std::vector<double>{1, 1.5, 1.75, 1.875}));
  CHECK_FALSE(flattening(std::vector<double>{1, 2, 4, 8}));
  CHECK_FALSE(flattening(std::vector<double>{1, 0.5, 0.25}));
}

TEST_CASE("h is conserved for the free equation") {
  const auto coeffs = free_half_line<double>();
  std::vector<double> grid;
  for (double x = 0.5; x <= 40; x += 0.5) grid.push_back(x);
  const auto zero = [](double) { return 0.0; };
  for (double lambda : {0.3, 1.0, 2.5}) {
    const auto h = h_monitor<double>(coeffs, zero, lambda, grid, 1e-12);
    for (double v : h.h_s) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : h.h_c) CHECK(v == doctest::Approx(lambda).epsilon(1e-12));
    CHECK(h.log_h_variation_tail < 1e-11);
  }
}

TEST_CASE("h flattens for an integrable potential") {
  const auto coeffs = decaying_potential();
  std::vector<double> grid;
  for (double x = 1; x <= 60; x += 0.25) grid.push_back(x);
  const auto h = h_monitor<double>(coeffs, [](double) { return 0.0; }, 1.0, grid, 1e-12);
  CHECK(h.log_h_variation_tail < 1e-3);
}

TEST_CASE("h requires lambda above q2") {
  const auto coeffs = free_half_line<double>();
  try {
    h_monitor<double>(coeffs, [](double) { return 5.0; }, 1.0, {1.0, 2.0}, 1e-10);
    FAIL("expected NonpositiveH");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonpositiveH);
  }
}

TEST_CASE("report on an empty grid is empty") {
  const auto coeffs = decaying_potential();
  const auto rep = weidmann_report(coeffs, QSplit<double>::integrable(coeffs), {});
  CHECK(rep.entries.empty());
  CHECK(rep.hypotheses.empty());
  CHECK_FALSE(rep.pass);
}

TEST_CASE("hypothesis sets for the decaying potential") {
  const auto coeffs = decaying_potential();
  const auto rep = weidmann_hypotheses(coeffs, QSplit<double>::integrable(coeffs));
  CHECK(rep.schrodinger_set_passed);
  CHECK(rep.local_set_passed);
  CHECK(rep.local_bounds.i_minus == doctest::Approx(1.0));
}

TEST_CASE("negative lambda is not in N for the decaying potential") {
  const auto coeffs = decaying_potential();
  const auto v = classify_lambda(coeffs, -1.0);
  CHECK(v.kind != Verdict::InN);
}

TEST_CASE("bounded solutions and local bounds imply InN") {
  const auto coeffs = decaying_potential();
  for (double lambda : {0.75, 3.0}) {
    const auto g = growth_checks(coeffs, lambda, 60.0, 1e-12);
    const auto c = criteria_scan(coeffs, lambda, 1.0, 59.0, 1.0);
    REQUIRE(g.bounded_u);
    REQUIRE(g.bounded_du);
    REQUIRE(c.i_minus > 0);
    CHECK(classify_lambda(coeffs, lambda).kind == Verdict::InN);
  }
}
