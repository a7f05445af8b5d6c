#include "rptlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rptlab/errors.hpp"
#include "rptlab/numerics.hpp"

namespace rptlab {

namespace {

OdeRhs hamilton_rhs(const SymbolModel& s) {
  const int n = s.dim();
  return [&s, n](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    Vec x = y.head(n), xi = y.tail(n);
    dy.head(n) = s.d_xi_principal(x, xi);
    dy.tail(n) = -s.d_x_principal(x, xi);
  };
}

double rho_of_state(const Domain& d, const Eigen::VectorXd& y) {
  return d.signed_membership(y.head(d.dim()));
}

// First root of rho(x(t)) in (ta, tb], assuming rho(ta) >= 0 > rho(tb).
double bisect_crossing(const Domain& d, const OdePath& path, double ta, double tb,
                       double tol_boundary) {
  Eigen::VectorXd y;
  for (int it = 0; it < 200; ++it) {
    double tm = 0.5 * (ta + tb);
    path.eval_into(tm, y);
    double r = rho_of_state(d, y);
    if (std::abs(r) <= tol_boundary) return tm;
    if (r > 0)
      ta = tm;
    else
      tb = tm;
    if (std::abs(tb - ta) < 1e-16 * (1.0 + std::abs(tb))) break;
  }
  return 0.5 * (ta + tb);
}

struct DirectionResult {
  OdePath path;
  EndpointKind end = EndpointKind::BoundaryExit;
  double t_end = 0.0;
  int tangencies = 0;
};

DirectionResult integrate_direction(const SymbolModel& s, const Domain& d,
                                    const Eigen::VectorXd& y0, double dir,
                                    const FlowOptions& opts) {
  DirectionResult out;
  const double eps_exit = 1e-6 * d.bbox_diameter();
  const double xi0_norm = y0.tail(s.dim()).norm();

  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;
  Dopri5 stepper(hamilton_rhs(s), 0.0, y0, dir, oo);

  double prev_t = 0.0;
  double prev_rho = rho_of_state(d, y0);
  bool pending = false;
  double pending_t = 0.0;
  double last_touch_t = -1e300;
  Eigen::VectorXd y;

  // Start already off the boundary going out: detected by the first probes.
  for (;;) {
    const OdeStep& st = stepper.step();
    out.path.push(st);

    const int K = 8;
    for (int k = 1; k <= K; ++k) {
      double t = st.t0 + (st.t1 - st.t0) * k / K;
      st.eval_into(t, y);
      double r = rho_of_state(d, y);

      if (!pending) {
        if (r < 0.0) {
          double t_cross =
              prev_rho >= 0.0 ? bisect_crossing(d, out.path, prev_t, t, opts.tol_boundary) : prev_t;
          pending = true;
          pending_t = t_cross;
        } else if (r <= opts.tol_boundary && prev_rho > r &&
                   std::abs(t - last_touch_t) > opts.eps_time) {
          // Grazing touch from the inside without a sign change.
          out.tangencies += 1;
          last_touch_t = t;
        }
      } else {
        if (r < -eps_exit || std::abs(t - pending_t) >= opts.eps_time) {
          if (r < 0.0 || r < -eps_exit) {
            out.end = EndpointKind::BoundaryExit;
            out.t_end = pending_t;
            out.path.trim_to(pending_t);
            return out;
          }
          // Returned inside after a sustained span: treat as a graze pair.
          out.tangencies += 1;
          pending = false;
          last_touch_t = t;
        } else if (r > 0.0) {
          out.tangencies += 1;
          pending = false;
          last_touch_t = t;
        }
      }
      prev_t = t;
      prev_rho = r;
    }

    double xin = stepper.y().tail(s.dim()).norm();
    if (xin > opts.xi_cap * xi0_norm || xin < xi0_norm / opts.xi_cap) {
      out.end = EndpointKind::FiberBlowup;
      out.t_end = stepper.t();
      return out;
    }
    if (std::abs(stepper.t()) >= opts.t_max) {
      if (pending) {
        out.end = EndpointKind::BoundaryExit;
        out.t_end = pending_t;
        out.path.trim_to(pending_t);
      } else {
        out.end = EndpointKind::TrappedCutoff;
        out.t_end = dir * opts.t_max;
        out.path.trim_to(out.t_end);
      }
      return out;
    }
  }
}

}  // namespace

const char* to_string(EndpointKind k) {
  switch (k) {
    case EndpointKind::BoundaryExit:
      return "boundary-exit";
    case EndpointKind::TrappedCutoff:
      return "trapped-cutoff";
    case EndpointKind::FiberBlowup:
      return "fiber-blowup";
  }
  return "?";
}

const char* to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Incoming:
      return "incoming";
    case BoundaryClass::Outgoing:
      return "outgoing";
    case BoundaryClass::Both:
      return "both";
    case BoundaryClass::Neither:
      return "neither";
  }
  return "?";
}

void Bicharacteristic::eval_into(double t, Eigen::VectorXd& y) const {
  if (t >= 0.0 && !fwd_.empty() && t <= t_plus_) {
    fwd_.eval_into(std::min(t, t_plus_), y);
  } else if (t < 0.0 && !bwd_.empty()) {
    bwd_.eval_into(std::max(t, t_minus_), y);
  } else if (!fwd_.empty()) {
    fwd_.eval_into(std::clamp(t, 0.0, t_plus_), y);
  } else {
    bwd_.eval_into(std::clamp(t, t_minus_, 0.0), y);
  }
}

PhasePoint Bicharacteristic::at(double t) const {
  Eigen::VectorXd y;
  eval_into(t, y);
  return PhasePoint{y.head(dim_), y.tail(dim_)};
}

Vec Bicharacteristic::x_at(double t) const { return at(t).x; }

std::vector<Vec> Bicharacteristic::spatial_polyline(double t0, double t1, int count) const {
  std::vector<Vec> pts;
  pts.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    double t = t0 + (t1 - t0) * i / (count - 1);
    pts.push_back(x_at(t));
  }
  return pts;
}

Bicharacteristic integrate_maximal(const SymbolModel& s, const Domain& d, const PhasePoint& p0,
                                   const FlowOptions& opts) {
  const int n = s.dim();
  if (d.dim() != n) throw ConfigError("domain and operator dimension mismatch");
  if (p0.xi.norm() == 0.0) throw ConfigError("zero covector");
  if (!s.is_null(p0.x, p0.xi, opts.tol_null))
    throw NotNull("initial phase point is not null: p = " +
                  std::to_string(s.principal(p0.x, p0.xi)));
  double rho0 = d.signed_membership(p0.x);
  if (rho0 < -d.tol_boundary())
    throw StartsOutside("rho(x0) = " + std::to_string(rho0));

  Eigen::VectorXd y0(2 * n);
  y0.head(n) = p0.x;
  y0.tail(n) = p0.xi;

  DirectionResult fwd = integrate_direction(s, d, y0, +1.0, opts);
  DirectionResult bwd = integrate_direction(s, d, y0, -1.0, opts);

  Bicharacteristic curve;
  curve.dim_ = n;
  curve.fwd_ = std::move(fwd.path);
  curve.bwd_ = std::move(bwd.path);
  curve.t_plus_ = fwd.t_end;
  curve.t_minus_ = bwd.t_end;
  curve.end_fwd_ = fwd.end;
  curve.end_bwd_ = bwd.end;
  curve.tangencies_ = fwd.tangencies + bwd.tangencies;

  // Sample list: backward step ends reversed, then the forward steps.
  std::vector<double> ts;
  ts.push_back(curve.t_minus_);
  for (auto it = curve.bwd_.steps().rbegin(); it != curve.bwd_.steps().rend(); ++it)
    if (it->t0 > curve.t_minus_ && it->t0 < 0.0) ts.push_back(it->t0);
  ts.push_back(0.0);
  for (const auto& st : curve.fwd_.steps())
    if (st.t1 > 0.0 && st.t1 < curve.t_plus_) ts.push_back(st.t1);
  if (curve.t_plus_ > 0.0) ts.push_back(curve.t_plus_);

  const double p_ref = s.principal(p0.x, p0.xi);
  const double xi_scale = std::pow(1.0 + p0.xi.norm(), s.order());
  for (double t : ts) {
    PhasePoint p = curve.at(t);
    curve.times_.push_back(t);
    double drift = std::abs(s.principal(p.x, p.xi) - p_ref) / (xi_scale * (1.0 + std::abs(t)));
    curve.max_p_drift_ = std::max(curve.max_p_drift_, drift);
    curve.samples_.push_back(std::move(p));
  }
  return curve;
}

BoundaryClass classify_null_boundary(const SymbolModel& s, const Domain& d, const PhasePoint& pb,
                                     const FlowOptions& opts) {
  if (std::abs(d.signed_membership(pb.x)) > 10 * d.tol_boundary())
    throw ConfigError("phase point is not on the boundary");
  if (!s.is_null(pb.x, pb.xi, opts.tol_null)) throw NotNull("boundary phase point is not null");

  const int n = s.dim();
  Eigen::VectorXd y0(2 * n);
  y0.head(n) = pb.x;
  y0.tail(n) = pb.xi;

  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;

  auto probe = [&](double eps) -> double {
    Dopri5 st(hamilton_rhs(s), 0.0, y0, eps > 0 ? +1.0 : -1.0, oo);
    double target = eps;
    while ((eps > 0) ? st.t() < target : st.t() > target) {
      const OdeStep& step = st.step();
      if ((eps > 0) ? step.t1 >= target : step.t1 <= target)
        return rho_of_state(d, step.eval(target));
    }
    return rho_of_state(d, st.y());
  };

  auto decide = [&](double eps) -> int {  // -1 out, +1 in, 0 ambiguous
    double r = probe(eps);
    if (r < -opts.tol_boundary) return -1;
    if (r > opts.tol_boundary) return +1;
    return 0;
  };

  double eps = opts.eps_probe;
  int fwd = decide(+eps), bwd = decide(-eps);
  if (fwd == 0) fwd = decide(+eps / 2);
  if (bwd == 0) bwd = decide(-eps / 2);
  if (fwd == 0 && bwd == 0)
    throw GrazingUndecidable("tangential boundary contact: probes remain on the boundary");
  if (fwd == 0 || bwd == 0)
    throw GrazingUndecidable("one-sided tangential contact at the boundary");

  if (bwd < 0 && fwd > 0) return BoundaryClass::Incoming;
  if (fwd < 0 && bwd > 0) return BoundaryClass::Outgoing;
  if (fwd < 0 && bwd < 0) return BoundaryClass::Both;
  return BoundaryClass::Neither;
}

ScatterRecord scattering_relation(const SymbolModel& s, const Domain& d, const PhasePoint& pb,
                                  const FlowOptions& opts) {
  BoundaryClass cls = classify_null_boundary(s, d, pb, opts);
  if (cls == BoundaryClass::Neither)
    throw ConfigError("phase point is neither incoming nor outgoing");

  ScatterRecord rec;
  rec.entry = pb;
  rec.entry_class = cls;
  if (cls == BoundaryClass::Both) {
    rec.exit = pb;
    rec.exit_class = cls;
    return rec;
  }

  Bicharacteristic curve = integrate_maximal(s, d, pb, opts);
  rec.tangencies = curve.tangencies();
  if (cls == BoundaryClass::Incoming) {
    if (curve.forward_end() != EndpointKind::BoundaryExit)
      throw Trapped(std::string("forward endpoint: ") + to_string(curve.forward_end()));
    rec.exit = curve.at(curve.tau_plus());
    rec.travel_time = curve.tau_plus();
  } else {
    if (curve.backward_end() != EndpointKind::BoundaryExit)
      throw Trapped(std::string("backward endpoint: ") + to_string(curve.backward_end()));
    rec.exit = curve.at(-curve.tau_minus());
    rec.travel_time = curve.tau_minus();
  }
  rec.exit_class = classify_null_boundary(s, d, rec.exit, opts);
  return rec;
}

Vec boundary_point_along(const Domain& d, const Vec& center, const Vec& dir) {
  Vec u = dir.normalized();
  double r_max = 0.75 * d.bbox_diameter();
  double lo = 0.0, hi = -1.0;
  const int steps = 4096;
  double r_prev = 0.0;
  for (int i = 1; i <= steps; ++i) {
    double r = r_max * i / steps;
    Vec x = center + r * u;
    bool in_box = true;
    for (int j = 0; j < d.dim(); ++j)
      if (x[j] < d.bbox()[static_cast<size_t>(j)][0] || x[j] > d.bbox()[static_cast<size_t>(j)][1])
        in_box = false;
    if (!in_box || d.signed_membership(x) < 0) {
      lo = r_prev;
      hi = r;
      break;
    }
    r_prev = r;
  }
  if (hi < 0) throw DegenerateBoundary("ray never leaves the domain");
  for (int it = 0; it < 128; ++it) {
    double mid = 0.5 * (lo + hi);
    if (d.signed_membership(center + mid * u) >= 0)
      lo = mid;
    else
      hi = mid;
  }
  Vec x = center + 0.5 * (lo + hi) * u;
  return x;
}

std::vector<PhasePoint> sample_null_boundary_points(const SymbolModel& s, const Domain& d,
                                                    const BoundarySampling& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  std::vector<PhasePoint> out;
  Vec center(d.dim());
  for (int j = 0; j < d.dim(); ++j)
    center[j] = 0.5 * (d.bbox()[static_cast<size_t>(j)][0] + d.bbox()[static_cast<size_t>(j)][1]);

  for (int i = 0; i < spec.count; ++i) {
    Vec dir(d.dim());
    if (d.dim() == 2) {
      double th = 2 * M_PI * (i + jitter(rng)) / spec.count;
      dir << std::cos(th), std::sin(th);
    } else {
      // Fibonacci sphere with a seeded rotation.
      double golden = M_PI * (3.0 - std::sqrt(5.0));
      double z = 1.0 - 2.0 * (i + 0.5) / spec.count;
      double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = golden * i + 2 * M_PI * jitter(rng) / spec.count;
      dir << rad * std::cos(th), rad * std::sin(th), z;
    }
    Vec x_b;
    try {
      x_b = boundary_point_along(d, center, dir);
    } catch (const Error&) {
      continue;
    }
    Vec nu;
    try {
      nu = d.inward_conormal(x_b);
    } catch (const Error&) {
      continue;
    }
    auto frame = d.boundary_tangent_frame(x_b);
    Vec xi_tan = spec.xi_scale * frame[0];
    std::vector<double> coeffs;
    try {
      coeffs = s.normal_char_poly(x_b, xi_tan, nu);
    } catch (const Error&) {
      continue;
    }
    auto roots = poly_roots(coeffs);
    for (const Complex& r : roots) {
      if (std::abs(r.imag()) > 1e-9 * std::max(1.0, std::abs(r))) continue;
      PhasePoint pb{x_b, xi_tan + r.real() * nu};
      if (pb.xi.norm() < 1e-10) continue;
      if (!s.is_null(pb.x, pb.xi, 1e-7)) continue;
      out.push_back(std::move(pb));
    }
  }
  return out;
}

std::vector<ScatterRecord> scatter_batch(const SymbolModel& s, const Domain& d,
                                         const BoundarySampling& spec, const FlowOptions& opts) {
  auto points = sample_null_boundary_points(s, d, spec);
  std::vector<ScatterRecord> records(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    try {
      records[i] = scattering_relation(s, d, points[i], opts);
    } catch (const Error& e) {
      records[i].entry = points[i];
      std::string what = e.what();
      records[i].status = what.substr(0, what.find(':'));
    }
  });
  return records;
}

}  // namespace rptlab
