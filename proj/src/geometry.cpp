#include "rptlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "rptlab/errors.hpp"
#include "rptlab/numerics.hpp"

namespace rptlab {

namespace {

std::span<const double> as_span(const Vec& v) {
  return std::span<const double>(v.data(), static_cast<size_t>(v.size()));
}

double dist_point_segment(const Vec& p, const Vec& a, const Vec& b) {
  Vec ab = b - a;
  double den = ab.squaredNorm();
  if (den == 0.0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / den, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double dist_point_polyline(const Vec& p, const std::vector<Vec>& curve) {
  double best = (p - curve.front()).norm();
  for (size_t i = 0; i + 1 < curve.size(); ++i)
    best = std::min(best, dist_point_segment(p, curve[i], curve[i + 1]));
  return best;
}

}  // namespace

Domain::Domain(int dim, Expr rho, std::vector<std::array<double, 2>> bbox, double grid_resolution)
    : dim_(dim), rho_(std::move(rho)), bbox_(std::move(bbox)), grid_resolution_(grid_resolution) {
  if (dim_ != 2 && dim_ != 3) throw ConfigError("domain dimension must be 2 or 3");
  if (static_cast<int>(bbox_.size()) != dim_) throw ConfigError("bbox must have dim entries");
  if (rho_.max_axis() >= dim_) throw ConfigError("rho references variables beyond the dimension");
  double d2 = 0;
  for (auto& [lo, hi] : bbox_) {
    if (!(lo < hi)) throw ConfigError("bbox intervals must be nonempty");
    d2 += (hi - lo) * (hi - lo);
  }
  diameter_ = std::sqrt(d2);
  grad_.reserve(dim_);
  for (int j = 0; j < dim_; ++j) grad_.push_back(rho_.diff(j));
}

double Domain::signed_membership(const Vec& x) const { return rho_.eval(as_span(x)); }

Vec Domain::grad_rho(const Vec& x) const {
  Vec g(dim_);
  for (int j = 0; j < dim_; ++j) g[j] = grad_[j].eval(as_span(x));
  return g;
}

Vec Domain::inward_conormal(const Vec& x_b) const {
  Vec g = grad_rho(x_b);
  double norm = g.norm();
  if (norm < 1e-8)
    throw DegenerateBoundary("|grad rho| = " + std::to_string(norm) + " at boundary point");
  return g / norm;
}

std::vector<Vec> Domain::boundary_tangent_frame(const Vec& x_b) const {
  Vec nu = inward_conormal(x_b);
  std::vector<Vec> frame;
  if (dim_ == 2) {
    Vec t(2);
    t << -nu[1], nu[0];
    frame.push_back(t);
  } else {
    // Pick the coordinate axis least aligned with nu, then Gram-Schmidt.
    int k = 0;
    for (int j = 1; j < 3; ++j)
      if (std::abs(nu[j]) < std::abs(nu[k])) k = j;
    Vec e1 = Vec::Zero(3);
    e1[k] = 1.0;
    e1 -= e1.dot(nu) * nu;
    e1.normalize();
    Vec e2(3);
    e2 << nu[1] * e1[2] - nu[2] * e1[1], nu[2] * e1[0] - nu[0] * e1[2],
        nu[0] * e1[1] - nu[1] * e1[0];
    frame.push_back(e1);
    frame.push_back(e2);
  }
  return frame;
}

void Domain::validate() const {
  const double eps_collar = 0.05 * diameter_;
  const double grad_floor = 1e-3 * diameter_;
  const int per_axis = dim_ == 2 ? 128 : 32;
  std::vector<double> x(static_cast<size_t>(dim_));
  std::vector<int> idx(static_cast<size_t>(dim_), 0);
  for (;;) {
    for (int j = 0; j < dim_; ++j) {
      double f = (idx[static_cast<size_t>(j)] + 0.5) / per_axis;
      x[static_cast<size_t>(j)] = bbox_[static_cast<size_t>(j)][0] +
                                  f * (bbox_[static_cast<size_t>(j)][1] - bbox_[static_cast<size_t>(j)][0]);
    }
    Vec xv = Eigen::Map<const Vec>(x.data(), dim_);
    double r = signed_membership(xv);
    if (std::abs(r) <= eps_collar) {
      if (grad_rho(xv).norm() < grad_floor)
        throw ConfigError("degenerate defining function: |grad rho| vanishes on the collar");
    }
    int j = 0;
    for (; j < dim_; ++j) {
      if (++idx[static_cast<size_t>(j)] < per_axis) break;
      idx[static_cast<size_t>(j)] = 0;
    }
    if (j == dim_) break;
  }
  // rho must be negative on the bounding-box faces.
  const int face_pts = dim_ == 2 ? 128 : 32;
  for (int axis = 0; axis < dim_; ++axis) {
    for (int side = 0; side < 2; ++side) {
      std::vector<int> fidx(static_cast<size_t>(dim_), 0);
      for (;;) {
        Vec xv(dim_);
        for (int j = 0; j < dim_; ++j) {
          if (j == axis) {
            xv[j] = bbox_[static_cast<size_t>(j)][static_cast<size_t>(side)];
          } else {
            double f = (fidx[static_cast<size_t>(j)] + 0.5) / face_pts;
            xv[j] = bbox_[static_cast<size_t>(j)][0] +
                    f * (bbox_[static_cast<size_t>(j)][1] - bbox_[static_cast<size_t>(j)][0]);
          }
        }
        if (signed_membership(xv) >= 0)
          throw ConfigError("bounding box does not strictly contain {rho >= 0}");
        int j = 0;
        for (; j < dim_; ++j) {
          if (j == axis) continue;
          if (++fidx[static_cast<size_t>(j)] < face_pts) break;
          fidx[static_cast<size_t>(j)] = 0;
        }
        if (j == dim_) break;
      }
    }
  }
}

double QuadratureSet::total_measure() const {
  return pairwise_sum(std::span<const double>(weights.data(), weights.size()));
}

static QuadratureSet tube_impl(const Domain* d, int dim, const std::vector<Vec>& curve,
                               double radius, double spacing) {
  if (!(radius > 0) || !(spacing > 0)) throw ConfigError("tube radius and spacing must be positive");
  if (curve.empty()) throw ConfigError("empty curve");

  std::vector<std::array<double, 2>> box(static_cast<size_t>(dim), {1e300, -1e300});
  for (const Vec& p : curve)
    for (int j = 0; j < dim; ++j) {
      box[static_cast<size_t>(j)][0] = std::min(box[static_cast<size_t>(j)][0], p[j] - radius);
      box[static_cast<size_t>(j)][1] = std::max(box[static_cast<size_t>(j)][1], p[j] + radius);
    }
  if (d) {
    for (int j = 0; j < dim; ++j) {
      box[static_cast<size_t>(j)][0] = std::max(box[static_cast<size_t>(j)][0], d->bbox()[static_cast<size_t>(j)][0]);
      box[static_cast<size_t>(j)][1] = std::min(box[static_cast<size_t>(j)][1], d->bbox()[static_cast<size_t>(j)][1]);
    }
  }

  std::vector<long> counts(static_cast<size_t>(dim));
  for (int j = 0; j < dim; ++j) {
    double len = box[static_cast<size_t>(j)][1] - box[static_cast<size_t>(j)][0];
    counts[static_cast<size_t>(j)] = std::max<long>(1, static_cast<long>(std::ceil(len / spacing)));
  }

  QuadratureSet q;
  q.spacing = spacing;
  const double cell = ipow(spacing, dim);
  std::vector<long> idx(static_cast<size_t>(dim), 0);
  Vec x(dim);
  for (;;) {
    for (int j = 0; j < dim; ++j)
      x[j] = box[static_cast<size_t>(j)][0] + (idx[static_cast<size_t>(j)] + 0.5) * spacing;
    bool keep = dist_point_polyline(x, curve) <= radius;
    if (keep && d) keep = d->signed_membership(x) >= 0;
    if (keep) {
      q.nodes.push_back(x);
      q.weights.push_back(cell);
    }
    int j = 0;
    for (; j < dim; ++j) {
      if (++idx[static_cast<size_t>(j)] < counts[static_cast<size_t>(j)]) break;
      idx[static_cast<size_t>(j)] = 0;
    }
    if (j == dim) break;
  }
  if (q.nodes.empty()) throw EmptyTube("no quadrature node inside the tube");
  return q;
}

QuadratureSet tube_quadrature(const Domain& d, const std::vector<Vec>& curve, double radius,
                              double spacing) {
  return tube_impl(&d, d.dim(), curve, radius, spacing);
}

QuadratureSet tube_quadrature_unclipped(int dim, const std::vector<Vec>& curve, double radius,
                                        double spacing) {
  return tube_impl(nullptr, dim, curve, radius, spacing);
}

Domain make_disk() {
  Expr rho = Expr::parse("1 - x1^2 - x2^2", 2);
  return Domain(2, rho, {{{-1.1, 1.1}, {-1.1, 1.1}}});
}

Domain make_box2d(const std::vector<std::array<double, 2>>& sides, double sharpness) {
  if (sides.size() != 2) throw ConfigError("box2d takes two side intervals");
  // Smoothed min over the four face distances; faces are exact to double
  // precision away from the (rounded) corners.
  const double k = sharpness;
  std::string ks = std::to_string(k);
  auto face = [&](const std::string& dist) { return "exp(-" + ks + "*(" + dist + "))"; };
  std::string lo1 = std::to_string(sides[0][0]), hi1 = std::to_string(sides[0][1]);
  std::string lo2 = std::to_string(sides[1][0]), hi2 = std::to_string(sides[1][1]);
  std::string src = "-(1/" + ks + ")*log(" + face("x1 - (" + lo1 + ")") + " + " +
                    face("(" + hi1 + ") - x1") + " + " + face("x2 - (" + lo2 + ")") + " + " +
                    face("(" + hi2 + ") - x2") + ")";
  double m1 = 0.12 * (sides[0][1] - sides[0][0]);
  double m2 = 0.12 * (sides[1][1] - sides[1][0]);
  return Domain(2, Expr::parse(src, 2),
                {{{sides[0][0] - m1, sides[0][1] + m1}, {sides[1][0] - m2, sides[1][1] + m2}}});
}

Domain make_cylinder2d(double length, double halfwidth) {
  return make_box2d({{{0.0, length}, {-halfwidth, halfwidth}}});
}

}  // namespace rptlab
