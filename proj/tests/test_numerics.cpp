#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "rptlab/numerics.hpp"
#include "rptlab/ode.hpp"

using rptlab::Complex;

TEST_CASE("adaptive quadrature hits tight tolerances") {
  double v = rptlab::adaptive_integrate([](double t) { return std::exp(t); }, 0.0, 1.0, 1e-12);
  CHECK(v == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  Complex o = rptlab::adaptive_integrate_c(
      [](double t) { return std::exp(Complex(0.0, 40.0) * t); }, 0.0, 1.0, 1e-11);
  Complex expect = (std::exp(Complex(0, 40.0)) - 1.0) / Complex(0, 40.0);
  CHECK(std::abs(o - expect) < 1e-10);
}

TEST_CASE("lobatto5 is exact through degree 7") {
  auto f = [](double t) { return 3 * t * t * t * t * t * t * t - t * t + 0.5; };
  double v = rptlab::lobatto5(f, -1.0, 2.0);
  // integral of 3t^7 - t^2 + 1/2 on [-1, 2]
  double exact = 3.0 * (256.0 - 1.0) / 8.0 - (8.0 - -1.0) / 3.0 + 0.5 * 3.0;
  CHECK(v == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("poly_roots on companion matrix") {
  // (tau^2 - 1)(tau^2 + 1) = tau^4 - 1
  std::vector<double> c{-1, 0, 0, 0, 1};
  auto roots = rptlab::poly_roots(c);
  REQUIRE(roots.size() == 4);
  double best_i = 1e9, best_one = 1e9;
  for (auto r : roots) {
    best_i = std::min(best_i, std::abs(r - Complex(0, 1)));
    best_one = std::min(best_one, std::abs(r - Complex(1, 0)));
  }
  CHECK(best_i < 1e-10);
  CHECK(best_one < 1e-10);
}

TEST_CASE("smooth bump profile") {
  CHECK(rptlab::smooth_bump(0.2) == 1.0);
  CHECK(rptlab::smooth_bump(0.5) == 1.0);
  CHECK(rptlab::smooth_bump(1.0) == 0.0);
  CHECK(rptlab::smooth_bump(0.75) == doctest::Approx(0.5));
  CHECK(rptlab::smooth_bump(0.6) > rptlab::smooth_bump(0.9));
}

TEST_CASE("dopri5 dense output against closed forms") {
  using Eigen::VectorXd;
  // Harmonic oscillator.
  rptlab::OdeRhs rhs = [](double, const VectorXd& y, VectorXd& dy) {
    dy.resize(2);
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  VectorXd y0(2);
  y0 << 1.0, 0.0;
  rptlab::OdeOptions opts;
  rptlab::Dopri5 st(rhs, 0.0, y0, +1.0, opts);
  rptlab::OdePath path;
  while (st.t() < 10.0) path.push(st.step());
  path.trim_to(10.0);
  for (double t = 0.25; t <= 10.0; t += 0.25) {
    VectorXd y = path.eval(t);
    CHECK(y[0] == doctest::Approx(std::cos(t)).epsilon(1e-9));
    CHECK(y[1] == doctest::Approx(-std::sin(t)).epsilon(1e-9));
  }
  // Backward direction.
  rptlab::Dopri5 sb(rhs, 0.0, y0, -1.0, opts);
  rptlab::OdePath back;
  while (sb.t() > -3.0) back.push(sb.step());
  back.trim_to(-3.0);
  VectorXd yb = back.eval(-1.5);
  CHECK(yb[0] == doctest::Approx(std::cos(1.5)).epsilon(1e-9));
  CHECK(yb[1] == doctest::Approx(std::sin(1.5)).epsilon(1e-9));
}

TEST_CASE("pairwise sum and loglog slope") {
  std::vector<double> v(1000, 0.1);
  CHECK(rptlab::pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> y;
  for (double hh : h) y.push_back(3.7 * std::pow(hh, 1.5));
  CHECK(rptlab::loglog_slope(h, y) == doctest::Approx(1.5).epsilon(1e-12));
}
