#include <cmath>

#include "doctest.h"
#include "rptlab/errors.hpp"
#include "rptlab/flow.hpp"

using rptlab::Bicharacteristic;
using rptlab::BoundaryClass;
using rptlab::Expr;
using rptlab::PhasePoint;
using rptlab::Vec;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

rptlab::Domain tricomi_box() { return rptlab::make_box2d({{{-1.0, 1.0}, {-1.0, 0.25}}}); }

}  // namespace

TEST_CASE("wave1d chord through the disk") {
  auto wave = rptlab::make_wave1d();
  auto disk = rptlab::make_disk();
  PhasePoint p0{v2(1, 0), v2(1, 1)};
  Bicharacteristic c = rptlab::integrate_maximal(wave, disk, p0);

  CHECK(c.tau_plus() == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(c.tau_minus() == doctest::Approx(0.0).epsilon(1e-6));
  PhasePoint exit = c.at(c.tau_plus());
  CHECK(exit.x[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(exit.x[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(exit.xi[0] == doctest::Approx(1.0));
  CHECK(exit.xi[1] == doctest::Approx(1.0));
  CHECK(c.maximal());
  CHECK(c.max_p_drift() < 1e-10);
}

TEST_CASE("interior start has finite endpoints on both sides") {
  auto wave = rptlab::make_wave1d();
  auto disk = rptlab::make_disk();
  Bicharacteristic c = rptlab::integrate_maximal(wave, disk, {v2(0.1, -0.2), v2(1, 1)});
  CHECK(c.tau_plus() > 0.0);
  CHECK(c.tau_minus() > 0.0);
  CHECK(c.maximal());
  for (double t : {-c.tau_minus(), c.tau_plus()}) {
    Vec x = c.x_at(t);
    CHECK(std::abs(x.squaredNorm() - 1.0) < 1e-7);
  }
}

TEST_CASE("tricomi closed form, through the cusp") {
  auto tric = rptlab::make_tricomi();
  auto box = tricomi_box();
  Bicharacteristic c = rptlab::integrate_maximal(tric, box, {v2(0, 0), v2(1, 0)});
  // x(t) = (-(2/3) t^3, -t^2), xi(t) = (1, -t); exits x2 = -1 at t = +-1.
  CHECK(c.tau_plus() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(c.tau_minus() == doctest::Approx(1.0).epsilon(1e-9));
  for (double t = -0.96; t <= 0.96; t += 0.12) {
    PhasePoint p = c.at(t);
    CHECK(std::abs(p.x[0] - (-(2.0 / 3.0) * t * t * t)) < 1e-9);
    CHECK(std::abs(p.x[1] - (-t * t)) < 1e-9);
    CHECK(std::abs(p.xi[0] - 1.0) < 1e-9);
    CHECK(std::abs(p.xi[1] - (-t)) < 1e-9);
  }
  CHECK(c.max_p_drift() < 1e-10);
}

TEST_CASE("classification at the disk boundary") {
  auto wave = rptlab::make_wave1d();
  auto disk = rptlab::make_disk();
  CHECK(rptlab::classify_null_boundary(wave, disk, {v2(1, 0), v2(1, 1)}) ==
        BoundaryClass::Incoming);
  CHECK(rptlab::classify_null_boundary(wave, disk, {v2(1, 0), v2(-1, 1)}) ==
        BoundaryClass::Outgoing);

  auto box = rptlab::make_box2d({{{0.0, 1.0}, {0.0, 1.0}}});
  auto transport = rptlab::make_transport({Expr::constant(1.0), Expr::constant(0.0)});
  CHECK(rptlab::classify_null_boundary(transport, box, {v2(0, 0.5), v2(0, 1)}) ==
        BoundaryClass::Incoming);

  // Field sliding along the top face: probing cannot decide.
  CHECK_THROWS_AS(
      rptlab::classify_null_boundary(transport, box, {v2(0.5, 1.0), v2(0, -1)}),
      rptlab::GrazingUndecidable);
}

TEST_CASE("scattering relation on the disk and the box") {
  auto wave = rptlab::make_wave1d();
  auto disk = rptlab::make_disk();
  auto rec = rptlab::scattering_relation(wave, disk, {v2(1, 0), v2(1, 1)});
  CHECK(rec.exit.x[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(rec.exit.x[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rec.travel_time == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(rec.entry_class == BoundaryClass::Incoming);
  CHECK(rec.exit_class == BoundaryClass::Outgoing);

  // unit-speed translation across the unit box
  auto box = rptlab::make_box2d({{{0.0, 1.0}, {0.0, 1.0}}});
  auto transport = rptlab::make_transport({Expr::constant(1.0), Expr::constant(0.0)});
  for (double b : {0.3, 0.5, 0.7}) {
    auto r = rptlab::scattering_relation(transport, box, {v2(0, b), v2(0, 2)});
    CHECK(r.exit.x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.exit.x[1] == doctest::Approx(b).epsilon(1e-9));
    CHECK(r.exit.xi[0] == doctest::Approx(0.0));
    CHECK(r.exit.xi[1] == doctest::Approx(2.0));
    CHECK(r.travel_time == doctest::Approx(1.0).epsilon(1e-9));
  }

  // involution: applying the relation at the exit returns the entry
  auto back = rptlab::scattering_relation(wave, disk, rec.exit);
  CHECK((back.exit.x - rec.entry.x).norm() < 1e-7);
  CHECK((back.exit.xi - rec.entry.xi).norm() < 1e-7);
}

TEST_CASE("covector rescaling keeps the trace and scales the exit covector") {
  auto wave = rptlab::make_wave1d(Expr::parse("1 + 0.2*x2", 2));
  auto disk = rptlab::make_disk();
  Vec x0 = v2(0.2, -0.3);
  double c0 = 1 + 0.2 * x0[1];
  Vec xi0 = v2(1.0, c0);  // null: xi2^2 = c^2 xi1^2
  auto base = rptlab::integrate_maximal(wave, disk, {x0, xi0});
  PhasePoint base_exit = base.at(base.tau_plus());
  for (double lam : {0.5, 2.0, 10.0}) {
    auto scaled = rptlab::integrate_maximal(wave, disk, {x0, lam * xi0});
    PhasePoint exit = scaled.at(scaled.tau_plus());
    CHECK((exit.x - base_exit.x).norm() < 1e-7);
    CHECK((exit.xi - lam * base_exit.xi).norm() < 1e-7 * lam);
    // reparametrization: time scales by lambda^(1-m)
    CHECK(scaled.tau_plus() == doctest::Approx(base.tau_plus() / lam).epsilon(1e-7));
  }
}

TEST_CASE("batch sampling: involution and the elliptic side of tricomi") {
  auto wave = rptlab::make_wave1d();
  auto disk = rptlab::make_disk();
  rptlab::BoundarySampling spec;
  spec.count = 16;
  auto recs = rptlab::scatter_batch(wave, disk, spec);
  CHECK(recs.size() >= 16);
  int ok = 0;
  for (const auto& r : recs) {
    if (r.status != "ok") continue;
    ++ok;
    auto back = rptlab::scattering_relation(wave, disk, r.exit);
    CHECK((back.exit.x - r.entry.x).norm() < 1e-7);
    CHECK((back.exit.xi - r.entry.xi).norm() < 1e-7);
  }
  CHECK(ok >= 16);

  // No null covectors over the elliptic side x2 > 0 of the Tricomi symbol.
  auto tric = rptlab::make_tricomi();
  auto upper = rptlab::make_box2d({{{-1.0, 1.0}, {0.5, 1.5}}});
  auto pts = rptlab::sample_null_boundary_points(tric, upper, spec);
  CHECK(pts.empty());
}

TEST_CASE("trapped rotational field is flagged") {
  auto rot = rptlab::make_transport({Expr::parse("-x2", 2), Expr::parse("x1", 2)});
  auto disk = rptlab::make_disk();
  rptlab::FlowOptions opts;
  opts.t_max = 5.0;
  auto c = rptlab::integrate_maximal(rot, disk, {v2(0.5, 0), v2(1, 0)}, opts);
  CHECK(c.forward_end() == rptlab::EndpointKind::TrappedCutoff);
  CHECK(c.backward_end() == rptlab::EndpointKind::TrappedCutoff);
  CHECK_THROWS_AS(rptlab::scattering_relation(rot, disk, c.at(0)), rptlab::Error);
}

TEST_CASE("precondition failures") {
  auto wave = rptlab::make_wave1d();
  auto disk = rptlab::make_disk();
  CHECK_THROWS_AS(rptlab::integrate_maximal(wave, disk, {v2(0, 0), v2(1, 0.5)}), rptlab::NotNull);
  CHECK_THROWS_AS(rptlab::integrate_maximal(wave, disk, {v2(2, 0), v2(1, 1)}),
                  rptlab::StartsOutside);
}
