#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slspec/expression.hpp"
#include "slspec/io.hpp"

using namespace slspec;

TEST_CASE("expressions evaluate with the usual precedence") {
  CHECK(Expression::parse("1 + 2*3")(0.0) == 7);
  CHECK(Expression::parse("2^3^2")(0.0) == 512);
  CHECK(Expression::parse("-x^2")(3.0) == -9);
  CHECK(Expression::parse("(1 + x) / 2")(3.0) == 2);
  CHECK(Expression::parse("exp(-x)")(1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(Expression::parse("sin(pi/2) + cos(0) + sqrt(4) + floor(2.7)")(0.0) == doctest::Approx(6));
  CHECK(Expression::parse("1.5e1")(0.0) == 15);
  CHECK(Expression::parse("x")(2.5L) == 2.5L);
}

TEST_CASE("malformed expressions are rejected") {
  for (const char* bad : {"", "1 +", "(x", "foo(x)", "x y", "2 ** 3"}) {
    try {
      Expression::parse(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
    }
  }
}

TEST_CASE("coefficient JSON round trip") {
  const auto j = nlohmann::json::parse(R"j({
    "a": 0, "b": "inf",
    "segments": [
      {"lo": 0, "hi": 2, "p": 1, "q": 0.5, "r": 2},
      {"lo": 2, "hi": "inf", "expr_p": "1", "expr_q": "exp(-x)", "expr_r": "1"}
    ]})j");
  const auto c = io::coefficients_from_json(j);
  CHECK(c.segments().size() == 2);
  CHECK(std::isinf(c.b()));
  CHECK(eval_coefficients(c, 3.0).q == doctest::Approx(std::exp(-3.0)));
  const auto back = io::coefficients_to_json(c);
  CHECK(back == j);
}

TEST_CASE("invalid coefficient JSON") {
  CHECK_THROWS_AS(io::coefficients_from_json(nlohmann::json::parse(R"({"a": 0})")), Error);
  CHECK_THROWS_AS(io::coefficients_from_json(nlohmann::json::parse(
                      R"({"a": 0, "b": 1, "segments": [{"lo": 0, "hi": 1, "p": 1}]})")),
                  Error);
}

TEST_CASE("tree JSON") {
  const auto h = io::tree_from_json(nlohmann::json::parse(R"({"homogeneous": {"b": 3, "c": 0.5, "levels": 8}})"));
  CHECK(h.truncation_N() == 8);
  CHECK(h.t()[2] == 1.0L);
  CHECK(h.b()[0] == 1);
  CHECK(h.b()[5] == 3);

  const auto t = io::tree_from_json(nlohmann::json::parse(R"({"t": [0, 1, 2.5], "b": [1, 3, 2]})"));
  CHECK(t.is_regular());
  CHECK(io::tree_to_json(t) == nlohmann::json::parse(R"({"t": [0.0, 1.0, 2.5], "b": [1, 3, 2]})"));

  const auto issues = io::tree_issues(nlohmann::json::parse(R"({"t": [0, 1, 2], "b": [1, 1, 2]})"));
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].path == "/b/1");
  CHECK(issues[0].message.find("b_k >= 2") != std::string::npos);
  CHECK_FALSE(io::tree_issues(nlohmann::json::parse(R"({"t": [0, 2, 1], "b": [1, 2, 2]})")).empty());
}
