#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "rptlab/expr.hpp"
#include "rptlab/geometry.hpp"
#include "rptlab/numerics.hpp"

namespace rptlab {

using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;

struct SymbolTerm {
  std::vector<int> alpha;  // multi-index in xi
  Expr coeff;              // real coefficient of x
};

struct ComplexTerm {
  std::vector<int> alpha;
  Expr re, im;
};

// Second derivatives of the principal symbol at a phase point:
//   D = d2_xx p_m,  B[j][a] = d2_{x_j xi_a} p_m,  C = d2_{xi xi} p_m.
struct HessianBlocks {
  Mat D, B, C;
};

// A differential operator through its left full symbol
//   p(x, xi) = p_m + p_{m-1} + p_0,
// with p_m = sum c_alpha(x) xi^alpha (real coefficients, |alpha| = m),
// p_{m-1} likewise with complex coefficients, and p_0 = V(x).  The operator
// acts as sum c_alpha(x) D^alpha with D = -i d/dx.
class SymbolModel {
 public:
  SymbolModel(std::string name, int order, int dim, std::vector<SymbolTerm> principal,
              std::vector<ComplexTerm> subleading = {}, Expr v_re = Expr(), Expr v_im = Expr());

  const std::string& name() const { return name_; }
  int order() const { return order_; }
  int dim() const { return dim_; }
  const std::vector<SymbolTerm>& principal_terms() const { return principal_; }
  const std::vector<ComplexTerm>& subleading_terms() const { return subleading_; }

  double principal(const Vec& x, const Vec& xi) const;
  Complex principal_c(const Vec& x, const CVec& xi) const;
  Vec d_xi_principal(const Vec& x, const Vec& xi) const;
  Vec d_x_principal(const Vec& x, const Vec& xi) const;
  CVec d_xi_principal_c(const Vec& x, const CVec& xi) const;
  CVec d_x_principal_c(const Vec& x, const CVec& xi) const;
  HessianBlocks hessian_blocks(const Vec& x, const Vec& xi) const;

  Complex lower(const Vec& x, const Vec& xi) const;  // p_{m-1}(x, xi)
  Complex lower_c(const Vec& x, const CVec& xi) const;
  Complex zeroth(const Vec& x) const;  // V(x); for order 1 this is p_{m-1}

  bool is_null(const Vec& x, const Vec& xi, double tol = 1e-8) const;

  // Coefficients (ascending in tau) of tau -> p_m(x_b, xi_tan + tau nu).
  // Throws CharacteristicBoundary when the leading coefficient vanishes.
  std::vector<double> normal_char_poly(const Vec& x_b, const Vec& xi_tan, const Vec& nu) const;

  // P applied to an evaluator by nested central differences with one
  // Richardson extrapolation; `step` is the base stencil step.
  Complex apply_fd(const std::function<Complex(const Vec&)>& u, const Vec& x, double step) const;

 private:
  struct TermCache {
    std::vector<int> alpha;
    Expr coeff;
    std::vector<Expr> grad;
    std::vector<std::vector<Expr>> hess;  // upper triangle, hess[j][k-j]
  };

  std::string name_;
  int order_, dim_;
  std::vector<SymbolTerm> principal_;
  std::vector<ComplexTerm> subleading_;
  Expr v_re_, v_im_;
  std::vector<TermCache> cache_;
};

// p_{m-1,1} - p_{m-1,2} for operators sharing a principal symbol (checked on
// random samples near x; PrincipalMismatch otherwise).
Complex subprincipal_diff(const SymbolModel& s1, const SymbolModel& s2, const Vec& x,
                          const Vec& xi);

// Builtin registry.
SymbolModel make_wave1d(Expr c = Expr::constant(1.0));       // n=2, p = xi2^2 - c^2 xi1^2
SymbolModel make_wave2d(Expr c = Expr::constant(1.0));       // n=3, p = xi2^2+xi3^2-c^2 xi1^2
SymbolModel make_tricomi();                                  // n=2, p = x2 xi1^2 + xi2^2
SymbolModel make_laplace(int dim = 2);                       // p = |xi|^2
SymbolModel make_transport(std::vector<Expr> field, Expr v_re = Expr(), Expr v_im = Expr());
SymbolModel make_magneticwave(Expr a1, Expr a2);             // wave1d + 2<a,xi>_g + p0
SymbolModel make_mixed4();                                   // n=2, p = xi2^4 - xi1^4

}  // namespace rptlab
