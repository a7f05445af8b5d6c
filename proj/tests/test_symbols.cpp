#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"
#include "rptlab/errors.hpp"
#include "rptlab/symbols.hpp"

using rptlab::Complex;
using rptlab::Expr;
using rptlab::SymbolModel;
using rptlab::Vec;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("principal values") {
  auto wave = rptlab::make_wave1d();
  auto tric = rptlab::make_tricomi();
  auto lap = rptlab::make_laplace(2);
  CHECK(wave.principal(v2(0.3, -0.2), v2(1, 1)) == doctest::Approx(0.0));
  CHECK(tric.principal(v2(0, 0), v2(1, 0)) == doctest::Approx(0.0));
  CHECK(lap.principal(v2(0, 0), v2(3, 4)) == doctest::Approx(25.0));
}

TEST_CASE("hamilton field closed forms") {
  auto wave = rptlab::make_wave1d();
  Vec vel = wave.d_xi_principal(v2(0, 0), v2(1, 1));
  Vec covel = -wave.d_x_principal(v2(0, 0), v2(1, 1));
  CHECK(vel[0] == doctest::Approx(-2.0));
  CHECK(vel[1] == doctest::Approx(2.0));
  CHECK(covel.norm() == doctest::Approx(0.0));

  auto tric = rptlab::make_tricomi();
  Vec tv = tric.d_xi_principal(v2(0, 0), v2(1, 0));
  Vec tc = -tric.d_x_principal(v2(0, 0), v2(1, 0));
  CHECK(tv.norm() == doctest::Approx(0.0));  // cusp: velocity vanishes
  CHECK(tc[0] == doctest::Approx(0.0));
  CHECK(tc[1] == doctest::Approx(-1.0));
}

TEST_CASE("hamilton field matches finite differences of the principal") {
  auto mag = rptlab::make_magneticwave(Expr::parse("x1*x2", 2), Expr::parse("sin(x2)", 2));
  auto tric = rptlab::make_tricomi();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-6;
  for (int trial = 0; trial < 1000; ++trial) {
    const SymbolModel& s = (trial % 2 == 0) ? mag : tric;
    Vec x = v2(u(rng), u(rng)), xi = v2(u(rng) + 2.0, u(rng) - 2.0);
    Vec dxi = s.d_xi_principal(x, xi), dx = s.d_x_principal(x, xi);
    for (int j = 0; j < 2; ++j) {
      Vec e = Vec::Zero(2);
      e[j] = h;
      double fd_xi = (s.principal(x, xi + e) - s.principal(x, xi - e)) / (2 * h);
      double fd_x = (s.principal(x + e, xi) - s.principal(x - e, xi)) / (2 * h);
      CHECK(std::abs(fd_xi - dxi[j]) <= 1e-6 * std::max(1.0, std::abs(dxi[j])));
      CHECK(std::abs(fd_x - dx[j]) <= 1e-6 * std::max(1.0, std::abs(dx[j])));
    }
  }
}

TEST_CASE("euler identity and homogeneity") {
  auto mixed = rptlab::make_mixed4();
  auto wave = rptlab::make_wave1d(Expr::parse("1 + 0.3*x2", 2));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Vec x = v2(u(rng), u(rng)), xi = v2(u(rng) + 1.5, u(rng) - 1.5);
    for (const SymbolModel* s : {&mixed, &wave}) {
      double p = s->principal(x, xi);
      double euler = xi.dot(s->d_xi_principal(x, xi));
      CHECK(std::abs(euler - s->order() * p) <= 1e-10 * std::max(1.0, std::abs(p)));
      double lam = 2.7;
      CHECK(s->principal(x, lam * xi) ==
            doctest::Approx(std::pow(lam, s->order()) * p).epsilon(1e-12));
      // velocity scales like lambda^(m-1)
      Vec vel = s->d_xi_principal(x, xi);
      Vec vel_scaled = s->d_xi_principal(x, lam * xi);
      CHECK((vel_scaled - std::pow(lam, s->order() - 1) * vel).norm() <= 1e-9 * vel.norm());
    }
  }
}

TEST_CASE("hessian blocks") {
  auto wave = rptlab::make_wave1d();
  auto blocks = wave.hessian_blocks(v2(0.7, -0.1), v2(2, 3));
  CHECK(blocks.C(0, 0) == doctest::Approx(-2.0));
  CHECK(blocks.C(1, 1) == doctest::Approx(2.0));
  CHECK(blocks.C(0, 1) == doctest::Approx(0.0));
  CHECK(blocks.B.norm() == doctest::Approx(0.0));
  CHECK(blocks.D.norm() == doctest::Approx(0.0));

  auto tric = rptlab::make_tricomi();
  auto tb = tric.hessian_blocks(v2(0, 0), v2(1, 0));
  CHECK(tb.C(0, 0) == doctest::Approx(0.0));
  CHECK(tb.C(1, 1) == doctest::Approx(2.0));
  CHECK(tb.B(1, 0) == doctest::Approx(2.0));  // d^2/dx2 dxi1 of x2 xi1^2
  CHECK(tb.B(0, 0) == doctest::Approx(0.0));
  CHECK(tb.B(0, 1) == doctest::Approx(0.0));
  CHECK(tb.B(1, 1) == doctest::Approx(0.0));
  CHECK(tb.D.norm() == doctest::Approx(0.0));
  CHECK((tb.C - tb.C.transpose()).norm() < 1e-12);

  auto lap = rptlab::make_laplace(2);
  auto lb = lap.hessian_blocks(v2(0, 0), v2(1, 2));
  CHECK((lb.C - 2.0 * rptlab::Mat::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("subprincipal difference") {
  auto wave = rptlab::make_wave1d();
  auto wave_b = rptlab::make_wave1d();
  CHECK(std::abs(rptlab::subprincipal_diff(wave, wave_b, v2(0.2, 0.1), v2(1, 1))) == 0.0);

  // magnetic wave vs plain wave: difference is p1 = 2<a, xi>_g with g = diag(-1, 1).
  Expr a1 = Expr::parse("0.3*x2", 2), a2 = Expr::parse("x1", 2);
  auto mag = rptlab::make_magneticwave(a1, a2);
  Vec x = v2(0.4, -0.3), xi = v2(1.2, 0.7);
  Complex diff = rptlab::subprincipal_diff(mag, wave, x, xi);
  double expect = 2.0 * (-(0.3 * x[1]) * xi[0] + x[0] * xi[1]);
  CHECK(diff.real() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(diff.imag() == doctest::Approx(0.0));

  // adding a potential does not change the order m-1 part when m >= 2
  rptlab::SymbolModel wave_v("wave+V", 2, 2,
                             {{{0, 2}, Expr::constant(1.0)}, {{2, 0}, Expr::constant(-1.0)}}, {},
                             Expr::parse("x1 + 2", 2), Expr());
  CHECK(std::abs(rptlab::subprincipal_diff(wave_v, wave, x, xi)) == 0.0);

  auto tric = rptlab::make_tricomi();
  CHECK_THROWS_AS(rptlab::subprincipal_diff(tric, wave, x, xi), rptlab::PrincipalMismatch);
}

TEST_CASE("normal characteristic polynomial") {
  auto wave = rptlab::make_wave1d();
  Vec x_b = v2(1, 0), nu = v2(-1, 0), xi_tan = v2(0, 1);
  auto c = wave.normal_char_poly(x_b, xi_tan, nu);  // 1 - tau^2, ascending
  REQUIRE(c.size() == 3);
  CHECK(c[0] == doctest::Approx(1.0));
  CHECK(c[1] == doctest::Approx(0.0));
  CHECK(c[2] == doctest::Approx(-1.0));

  auto lap = rptlab::make_laplace(2);
  auto cl = lap.normal_char_poly(x_b, xi_tan, nu);  // tau^2 + 1
  CHECK(cl[0] == doctest::Approx(1.0));
  CHECK(cl[2] == doctest::Approx(1.0));

  auto tric = rptlab::make_tricomi();
  auto ct = tric.normal_char_poly(v2(0, -1), v2(1, 0), v2(0, 1));  // tau^2 - 1
  CHECK(ct[0] == doctest::Approx(-1.0));
  CHECK(ct[1] == doctest::Approx(0.0));
  CHECK(ct[2] == doctest::Approx(1.0));

  // characteristic boundary: leading coefficient p(x, nu) = 0
  CHECK_THROWS_AS(tric.normal_char_poly(v2(0, 0), v2(0, 1), v2(1, 0)),
                  rptlab::CharacteristicBoundary);
}

TEST_CASE("apply_fd reproduces the full symbol on plane waves") {
  Expr a1 = Expr::parse("0.2*x1", 2), a2 = Expr::parse("0.1*x2", 2);
  auto mag = rptlab::make_magneticwave(a1, a2);
  Vec x = v2(0.3, 0.4);
  Vec k = v2(1.3, -0.8);
  auto u = [&](const Vec& y) { return std::exp(Complex(0, 1) * (k[0] * y[0] + k[1] * y[1])); };
  Complex pu = mag.apply_fd(u, x, 1e-3);
  Complex full = mag.principal(x, k) + mag.lower(x, k) + mag.zeroth(x);
  Complex expect = full * u(x);
  CHECK(std::abs(pu - expect) < 1e-7);
}
