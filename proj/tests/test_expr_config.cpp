#include <doctest.h>

#include <cmath>

#include "opcert/config.hpp"
#include "opcert/expr.hpp"
#include "opcert/svg.hpp"

using namespace opcert;

TEST_CASE("expression grammar") {
  CHECK(compile_expression("2 + 3*x^2")(2.0) == doctest::Approx(14.0));
  CHECK(compile_expression("-x^2")(3.0) == doctest::Approx(-9.0));  // unary binds the power
  CHECK(compile_expression("2^3^2")(0.0) == doctest::Approx(512.0));  // right associative
  CHECK(compile_expression("exp(x)")(1.0) == doctest::Approx(std::exp(1.0)));
  CHECK(compile_expression("sign(x)*log(1+abs(x))")(-std::exp(1.0) + 1.0) ==
        doctest::Approx(-std::log(std::exp(1.0))));
  CHECK(compile_expression("x*sin(x)")(2.0) == doctest::Approx(2.0 * std::sin(2.0)));
  CHECK(compile_expression("sqrt(x^2+1)")(1.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(compile_expression("(1+x)/(1-x)")(0.5) == doctest::Approx(3.0));

  // piecewise(t1, v1, default): v1 where x < t1
  auto pw = compile_expression("piecewise(0, 0-x, x)");
  CHECK(pw(-2.0) == doctest::Approx(2.0));
  CHECK(pw(3.0) == doctest::Approx(3.0));

  CHECK_THROWS_AS(parse_expression("x +"), ExprParseError);
  CHECK_THROWS_AS(parse_expression("foo(x)"), ExprParseError);
  CHECK_THROWS_AS(parse_expression("x ) y"), ExprParseError);
  CHECK_THROWS_AS(parse_expression("piecewise(1, 2)"), ExprParseError);
}

TEST_CASE("operator expressions and intervals") {
  const OperatorExpr free_op = parse_operator("i_d_dx");
  CHECK(free_op.kind == ContinuumKind::first_order_iddx_plus_f);
  CHECK(free_op.potential == nullptr);

  const OperatorExpr shifted = parse_operator("i_d_dx + x");
  CHECK(shifted.potential->eval(2.5) == doctest::Approx(2.5));
  CHECK(shifted.potential_label == "x");

  const OperatorExpr sl = parse_operator("-d2_dx2 + x^2");
  CHECK(sl.kind == ContinuumKind::sturm_liouville_minus_dxx_plus_V);
  CHECK(sl.potential->eval(3.0) == doctest::Approx(9.0));

  CHECK_THROWS_AS(parse_operator("d_dx + x"), ExprParseError);
  CHECK_THROWS_AS(parse_operator("i_d_dx * x"), ExprParseError);

  double a, b;
  parse_interval("-inf,inf", a, b);
  CHECK(std::isinf(a));
  CHECK(std::isinf(b));
  parse_interval("0, inf", a, b);
  CHECK(a == 0.0);
  parse_interval("-1.5,2.5", a, b);
  CHECK(a == -1.5);
  CHECK(b == 2.5);
  CHECK_THROWS_AS(parse_interval("3,1", a, b), ExprParseError);
  CHECK_THROWS_AS(parse_interval("abc", a, b), ExprParseError);
}

TEST_CASE("config parsing") {
  const std::string text = R"(# scenario config
[scenario]
name = "demo"     # trailing comment
seed = 42

[grid]
half_width = 12.5
n_points = 401

[checks]
run = ["deficiency", "adequacy"]
weights = [1, 2.5, 3]
)";
  const Config cfg = Config::parse(text);
  CHECK(cfg.get("scenario", "name").as_string() == "demo");
  CHECK(cfg.get("scenario", "seed").as_number() == 42.0);
  CHECK(cfg.get("grid", "half_width").as_number() == 12.5);
  CHECK(cfg.string_list("checks", "run") == std::vector<std::string>{"deficiency", "adequacy"});
  CHECK(cfg.number_list("checks", "weights") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(cfg.number_or("grid", "missing", 7.0) == 7.0);
  CHECK_THROWS_AS(cfg.get("grid", "missing"), PreconditionError);

  CHECK_THROWS_AS(Config::parse("key = 1\n"), ConfigParseError);        // outside section
  CHECK_THROWS_AS(Config::parse("[s]\nkey 1\n"), ConfigParseError);     // missing '='
  CHECK_THROWS_AS(Config::parse("[s]\nkey = [1, 2\n"), ConfigParseError);
  try {
    Config::parse("[s]\nok = 1\nbad = zzz\n");
    CHECK(false);
  } catch (const ConfigParseError& e) {
    CHECK(e.line == 3);  // errors carry line numbers
  }
}

TEST_CASE("plots are deterministic and handle missing sections") {
  Json empty;
  const std::string svg1 = render_plots(empty);
  const std::string svg2 = render_plots(empty);
  CHECK(svg1 == svg2);
  CHECK(svg1.find("<svg") == 0);
  CHECK(svg1.find("viewBox=\"0 0 800 600\"") != std::string::npos);
  CHECK(svg1.find("eigenvalue ladder") != std::string::npos);
  CHECK(svg1.find("polyline") == std::string::npos);  // axes only for the empty report

  Json rep;
  rep["spectrum"]["eigenvalues"] = std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0};
  rep["singular_values"] = std::vector<double>{1.0, 0.1, 0.01};
  rep["counting"]["lambdas"] = std::vector<double>{1.0, 2.0, 4.0};
  rep["counting"]["counts"] = std::vector<double>{2.0, 6.0, 10.0};
  const std::string svg = render_plots(rep);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(render_plots(rep) == svg);
}
