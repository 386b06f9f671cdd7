#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "slope/expr.hpp"
#include "slope/geometry.hpp"

using namespace slope;

namespace {

/// Independent random expression generator: the test owns the tree and its
/// value, the library only sees the printed source.
struct RandomExpr {
  std::string src;
  double value;  // at the fixed point below
};

constexpr double kX[4] = {0.37, 0.11, 0.83, 0.59};

RandomExpr gen(std::mt19937& rng, int depth) {
  std::uniform_real_distribution<double> num(0.1, 4.0);
  const int choice = static_cast<int>(rng() % (depth <= 0 ? 2u : 7u));
  switch (choice) {
    case 0: {
      const double v = num(rng);
      std::ostringstream s;
      s.precision(17);
      s << v;
      return {s.str(), v};
    }
    case 1: {
      const int i = static_cast<int>(rng() % 4u);
      return {"x" + std::to_string(i + 1), kX[i]};
    }
    case 2: {
      const RandomExpr a = gen(rng, depth - 1), b = gen(rng, depth - 1);
      return {"(" + a.src + "+" + b.src + ")", a.value + b.value};
    }
    case 3: {
      const RandomExpr a = gen(rng, depth - 1), b = gen(rng, depth - 1);
      return {"(" + a.src + "-" + b.src + ")", a.value - b.value};
    }
    case 4: {
      const RandomExpr a = gen(rng, depth - 1), b = gen(rng, depth - 1);
      return {"(" + a.src + "*" + b.src + ")", a.value * b.value};
    }
    case 5: {
      const RandomExpr a = gen(rng, depth - 1);
      const int f = static_cast<int>(rng() % 3u);
      if (f == 0) return {"sin(" + a.src + ")", std::sin(a.value)};
      if (f == 1) return {"cos(" + a.src + ")", std::cos(a.value)};
      return {"exp(" + a.src + "*0.25)", std::exp(a.value * 0.25)};
    }
    default: {
      const RandomExpr a = gen(rng, depth - 1);
      return {"(-" + a.src + ")", -a.value};
    }
  }
}

}  // namespace

TEST_CASE("literal and product examples") {
  CHECK(ExprAst::parse("0").eval({kX, 4}) == 0.0);
  const ExprAst p = ExprAst::parse("0.3*sin(2*pi*x1)*cos(2*pi*x2)");
  const double expect = 0.3 * std::sin(2 * M_PI * kX[0]) * std::cos(2 * M_PI * kX[1]);
  CHECK(p.eval({kX, 4}) == doctest::Approx(expect).epsilon(1e-15));
  // canonical print round-trips
  CHECK(ExprAst::parse(p.to_string()).to_string() == p.to_string());
}

TEST_CASE("precedence and associativity") {
  const double x[1] = {0.0};
  CHECK(ExprAst::parse("2+3*4").eval({x, 1}) == 14.0);
  CHECK(ExprAst::parse("2*3^2").eval({x, 1}) == 18.0);        // ^ binds tighter
  CHECK(ExprAst::parse("-2^2").eval({x, 1}) == -4.0);         // ^ above unary minus
  CHECK(ExprAst::parse("2^-1").eval({x, 1}) == 0.5);          // unary allowed in exponent
  CHECK(ExprAst::parse("2^3^2").eval({x, 1}) == 512.0);       // right associative
  CHECK(ExprAst::parse("8-4-2").eval({x, 1}) == 2.0);         // left associative
  CHECK(ExprAst::parse("16/4/2").eval({x, 1}) == 2.0);
  CHECK(ExprAst::parse("-2-3").eval({x, 1}) == -5.0);
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    ExprAst::parse("1+ +2");
    FAIL("expected syntax error");
  } catch (const ExprSyntaxError& e) {
    CHECK(e.offset() == 3);
  }
  try {
    ExprAst::parse("sin(1");
    FAIL("expected syntax error");
  } catch (const ExprSyntaxError& e) {
    CHECK(e.offset() == 5);
  }
  CHECK_THROWS_AS(ExprAst::parse("foo(1)"), ExprSyntaxError);
  try {
    ExprAst::parse("2*blah");
    FAIL("expected unknown identifier");
  } catch (const ExprSyntaxError& e) {
    CHECK(std::string(e.what()).find("blah") != std::string::npos);
  }
}

TEST_CASE("evaluation guards division and log") {
  const double x[1] = {0.0};
  CHECK_THROWS_AS(ExprAst::parse("1/x1").eval({x, 1}), ExprEvalError);
  CHECK_THROWS_AS(ExprAst::parse("log(x1-1)").eval({x, 1}), ExprEvalError);
  try {
    ExprAst::parse("2+log(0)").eval({x, 1}, 42);
    FAIL("expected eval error");
  } catch (const ExprEvalError& e) {
    CHECK(e.grid_index() == 42);
    CHECK(e.source_offset() == 2);
  }
}

TEST_CASE("out-of-range variable binds at eval time") {
  const ExprAst ast = ExprAst::parse("x3");  // parses fine
  const TorusGrid grid(GridKind::RealRiemannian, 2, 8);
  CHECK_THROWS_AS(eval_on_grid(ast, grid), ExprEvalError);
}

TEST_CASE("eval_on_grid examples") {
  const TorusGrid grid(GridKind::RealRiemannian, 2, 16);
  const ScalarField one = eval_on_grid(ExprAst::parse("1"), grid);
  for (double v : one.values) CHECK(v == 1.0);

  const ScalarField s = eval_on_grid(ExprAst::parse("sin(2*pi*x1)"), grid);
  std::size_t quarter = 0;
  for (int a = 0; a < 2; ++a) quarter += (a == 0 ? grid.stride(0) * 4 : 0);  // x1 = 4/16
  CHECK(s[quarter] == doctest::Approx(1.0).epsilon(1e-15));

  const ScalarField ident =
      eval_on_grid(ExprAst::parse("sin(2*pi*x1)^2 + cos(2*pi*x1)^2"), grid);
  for (double v : ident.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("parse-print-parse idempotence and value agreement on 200 random expressions") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const RandomExpr e = gen(rng, 4);
    if (!std::isfinite(e.value) || std::abs(e.value) > 1e12) continue;
    const ExprAst ast = ExprAst::parse(e.src);
    CHECK(ast.eval({kX, 4}) == doctest::Approx(e.value).epsilon(1e-12));
    const std::string once = ast.to_string();
    const std::string twice = ExprAst::parse(once).to_string();
    CHECK(once == twice);
    CHECK(ExprAst::parse(once).eval({kX, 4}) == doctest::Approx(e.value).epsilon(1e-12));
  }
}
