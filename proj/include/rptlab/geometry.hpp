#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rptlab/expr.hpp"

namespace rptlab {

using Vec = Eigen::VectorXd;

// Compact region M = {rho >= 0} in a single chart, with a bounding box that
// strictly contains it.  The auxiliary metric is Euclidean throughout.
class Domain {
 public:
  Domain(int dim, Expr rho, std::vector<std::array<double, 2>> bbox,
         double grid_resolution = 0.02);

  int dim() const { return dim_; }
  const Expr& rho() const { return rho_; }
  const std::vector<std::array<double, 2>>& bbox() const { return bbox_; }
  double bbox_diameter() const { return diameter_; }
  double tol_boundary() const { return tol_boundary_; }
  double grid_resolution() const { return grid_resolution_; }

  // rho(x); positive inside, zero on the boundary, negative outside.
  double signed_membership(const Vec& x) const;
  bool inside(const Vec& x) const { return signed_membership(x) >= -tol_boundary_; }
  Vec grad_rho(const Vec& x) const;
  // Unit inward conormal grad(rho)/|grad(rho)| at a boundary point.
  Vec inward_conormal(const Vec& x_b) const;

  // Orthonormal covectors tangent to the boundary at x_b (dim-1 of them).
  std::vector<Vec> boundary_tangent_frame(const Vec& x_b) const;

  // Samples the collar {|rho| <= eps_collar} and checks |grad rho| > 0 there,
  // and that rho < 0 on the bounding-box faces.  ConfigError on violation.
  void validate() const;

 private:
  int dim_;
  Expr rho_;
  std::vector<Expr> grad_;
  std::vector<std::array<double, 2>> bbox_;
  double diameter_;
  double grid_resolution_;
  double tol_boundary_ = 1e-9;
};

struct QuadratureSet {
  std::vector<Vec> nodes;
  std::vector<double> weights;
  double spacing = 0.0;
  double total_measure() const;
};

// Tensor-product midpoint nodes covering {dist(x, curve) <= radius} inter
// {rho >= 0}; weights are cell volumes.  Throws EmptyTube when nothing
// qualifies.
QuadratureSet tube_quadrature(const Domain& d, const std::vector<Vec>& curve, double radius,
                              double spacing);

// Same grid but without the domain clip (integrals over the ambient chart).
QuadratureSet tube_quadrature_unclipped(int dim, const std::vector<Vec>& curve, double radius,
                                        double spacing);

// Builtin domains ("disk", "box2d", "cylinder2d"); see docs/config.md.
Domain make_disk();
Domain make_box2d(const std::vector<std::array<double, 2>>& sides, double sharpness = 120.0);
Domain make_cylinder2d(double length, double halfwidth);

}  // namespace rptlab
