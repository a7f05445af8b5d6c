#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rptlab/errors.hpp"
#include "rptlab/expr.hpp"

using rptlab::Expr;

namespace {

double at2(const Expr& e, double a, double b) {
  std::array<double, 2> x{a, b};
  return e.eval(x);
}

// Random expression trees over the full grammar, biased toward polynomials so
// most draws stay within function domains.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  std::uniform_int_distribution<int> pick(0, 9);
  if (depth <= 0) {
    int leaf = pick(rng) % 3;
    if (leaf == 0) return Expr::constant(coeff(rng));
    return Expr::variable(pick(rng) % 2);
  }
  switch (pick(rng)) {
    case 0:
      return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 1:
      return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 2:
    case 3:
      return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 4:
      return pow_int(random_expr(rng, depth - 1), 1 + pick(rng) % 3);
    case 5:
      return sin(random_expr(rng, depth - 1));
    case 6:
      return cos(random_expr(rng, depth - 1));
    case 7:
      return tanh(random_expr(rng, depth - 1));
    case 8:
      return exp(Expr::constant(0.3) * random_expr(rng, depth - 1));
    default:
      return -random_expr(rng, depth - 1);
  }
}

}  // namespace

TEST_CASE("parse: arithmetic precedence and examples") {
  CHECK(at2(Expr::parse("x1^2 + x2", 2), 2, 3) == doctest::Approx(7.0));
  CHECK(at2(Expr::parse("sin(x1)*x2", 2), 0, 5) == doctest::Approx(0.0));
  CHECK(at2(Expr::parse("1 - x1^2 - x2^2", 2), 0.6, 0.8) == doctest::Approx(0.0));
  // ^ binds tighter than unary minus and *.
  CHECK(at2(Expr::parse("-x1^2", 2), 3, 0) == doctest::Approx(-9.0));
  CHECK(at2(Expr::parse("2*x1^3", 2), 2, 0) == doctest::Approx(16.0));
  CHECK(at2(Expr::parse("6/2/3", 2), 0, 0) == doctest::Approx(1.0));
  CHECK(at2(Expr::parse("1 - 2 - 3", 2), 0, 0) == doctest::Approx(-4.0));
  CHECK(at2(Expr::parse("x1^-2", 2), 2, 0) == doctest::Approx(0.25));
  CHECK(at2(Expr::parse("exp(log(2.5))", 2), 0, 0) == doctest::Approx(2.5));
}

TEST_CASE("parse: errors carry positions") {
  CHECK_THROWS_AS(Expr::parse("", 2), rptlab::SyntaxError);
  CHECK_THROWS_AS(Expr::parse("x1 + ", 2), rptlab::SyntaxError);
  CHECK_THROWS_AS(Expr::parse("x1 @ x2", 2), rptlab::SyntaxError);
  CHECK_THROWS_AS(Expr::parse("x3", 2), rptlab::UnknownIdentifier);
  CHECK_THROWS_AS(Expr::parse("foo(x1)", 2), rptlab::UnknownIdentifier);
  CHECK_THROWS_AS(Expr::parse("sin x1", 2), rptlab::ArityError);
  CHECK_THROWS_AS(Expr::parse("x1(2)", 2), rptlab::ArityError);
  CHECK_THROWS_AS(Expr::parse("x1^2.5", 2), rptlab::SyntaxError);
  CHECK_THROWS_AS(Expr::parse("x1^x2", 2), rptlab::SyntaxError);
}

TEST_CASE("eval: domain errors") {
  std::array<double, 1> zero{0.0};
  std::array<double, 1> neg{-1.0};
  CHECK_THROWS_AS(Expr::parse("log(x1)", 1).eval(zero), rptlab::EvalDomainError);
  CHECK_THROWS_AS(Expr::parse("sqrt(x1)", 1).eval(neg), rptlab::EvalDomainError);
  CHECK_THROWS_AS(Expr::parse("1/x1", 1).eval(zero), rptlab::EvalDomainError);
}

TEST_CASE("diff: examples") {
  Expr e = Expr::parse("x1^2*x2", 2);
  CHECK(at2(e.diff(0), 3, 2) == doctest::Approx(12.0));
  Expr s2 = Expr::parse("sin(x1)", 1).diff(0).diff(0);
  std::array<double, 1> x0{0.0};
  CHECK(s2.eval(x0) == doctest::Approx(0.0));
  Expr c = Expr::parse("exp(x2)", 2).diff(0);
  CHECK(at2(c, 1.3, -0.4) == doctest::Approx(0.0));
}

TEST_CASE("diff agrees with central differences on random expressions") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> point(-1.5, 1.5);
  const double step = 1e-5;
  int checked = 0;
  while (checked < 1000) {
    Expr e = random_expr(rng, 4);
    Expr dx = e.diff(0), dy = e.diff(1);
    for (int trial = 0; trial < 4 && checked < 1000; ++trial) {
      double a = point(rng), b = point(rng);
      double f00, fp, fm, gp, gm, d0, d1;
      try {
        f00 = at2(e, a, b);
        fp = at2(e, a + step, b);
        fm = at2(e, a - step, b);
        gp = at2(e, a, b + step);
        gm = at2(e, a, b - step);
        d0 = at2(dx, a, b);
        d1 = at2(dy, a, b);
      } catch (const rptlab::EvalDomainError&) {
        continue;
      }
      if (!std::isfinite(f00) || std::abs(f00) > 1e6) continue;
      if (std::abs(d0) > 1e5 || std::abs(d1) > 1e5) continue;
      double fd0 = (fp - fm) / (2 * step);
      double fd1 = (gp - gm) / (2 * step);
      double scale0 = std::max({1.0, std::abs(d0)});
      double scale1 = std::max({1.0, std::abs(d1)});
      CHECK(std::abs(fd0 - d0) / scale0 <= 1e-6);
      CHECK(std::abs(fd1 - d1) / scale1 <= 1e-6);
      ++checked;
    }
  }
}

TEST_CASE("print/parse round trip is evaluation-equivalent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> point(-1.2, 1.2);
  for (int i = 0; i < 200; ++i) {
    Expr e = random_expr(rng, 4);
    Expr back = Expr::parse(e.print(), 2);
    for (int k = 0; k < 5; ++k) {
      double a = point(rng), b = point(rng);
      double v0, v1;
      try {
        v0 = at2(e, a, b);
        v1 = at2(back, a, b);
      } catch (const rptlab::EvalDomainError&) {
        continue;
      }
      if (!std::isfinite(v0)) continue;
      CHECK(v1 == doctest::Approx(v0).epsilon(1e-12));
    }
  }
}

TEST_CASE("folding keeps derivatives total") {
  // d/dx of exp(x2) is 0 after folding, with no surviving tree.
  Expr z = Expr::parse("exp(x2)", 2).diff(0);
  CHECK(z.is_zero());
  // Folding must not evaluate log at bad constants eagerly.
  Expr keep = Expr::parse("log(x1 - x1)", 1);
  std::array<double, 1> x{2.0};
  CHECK_THROWS_AS(keep.folded().eval(x), rptlab::EvalDomainError);
}
