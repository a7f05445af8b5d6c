#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "rptlab/flow.hpp"
#include "rptlab/geometry.hpp"
#include "rptlab/symbols.hpp"

namespace rptlab {

using CMat = Eigen::MatrixXcd;

struct BeamOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double quad_rel_tol = 1e-3;    // evaluator panel refinement target
  int max_panel_depth = 14;      // adaptive bisection cap per active window
  double r_supp = 0.0;           // 0 -> 6 sqrt(h_min) max (min eig Im H)^(-1/2)
  std::vector<double> h_list = {0.1, 0.05, 0.025, 0.0125};
  bool adjoint = false;          // amplitude transport for P* instead of P
};

// Gaussian-beam frame along an injective null bicharacteristic segment,
// re-parametrized to frame time s in [0, T]:        phase
//   Phi(x, s) = xi(s).(x - x(s)) + (1/2) H(s)(x - x(s)).(x - x(s)),
// with H solving  H' + HCH + BH + HB^t + D = 0,  Im H > 0, and amplitude
//   a0(s) = exp(-i int_0^s b),  b = (1/2i) tr(C H) + p_{m-1}(gamma).
// The evaluator integrates exp(i Phi/h) a0 chi over s.
class BeamFrame {
 public:
  const SymbolModel& symbol() const { return sym_; }
  int dim() const { return sym_.dim(); }
  double T() const { return T_; }
  double r_supp() const { return r_supp_; }
  double min_im_eig() const { return min_im_; }
  bool adjoint() const { return adjoint_; }
  const std::vector<double>& sample_times() const { return ts_; }
  const std::vector<CMat>& sample_H() const { return H_; }
  const std::vector<Complex>& sample_beta() const { return beta_; }
  const std::vector<double>& h_list() const { return h_list_; }

  PhasePoint phase_point(double s) const;
  Vec velocity(double s) const;     // d_xi p at gamma(s)
  Vec covelocity(double s) const;   // -d_x p at gamma(s)
  CMat H_at(double s) const;
  Complex b_at(double s) const;
  Complex beta_at(double s) const;
  Complex a0_at(double s) const;
  Complex phase(const Vec& x, double s) const;

  // evaluate_quasimode: u_h(x), panel-refined to rel_tol (default from the
  // frame options).  Throws QuadratureNonconvergence at the depth cap.
  Complex eval(const Vec& x, double h) const;
  Complex eval(const Vec& x, double h, double rel_tol, int max_depth) const;

  // Amplitude rebuilt with the adjoint transport (same curve, same H).
  BeamFrame adjoint_partner(const SymbolModel& adjoint_of) const;

 private:
  friend BeamFrame build_beam(const SymbolModel&, const Bicharacteristic&, double, double,
                              const BeamOptions&, const CMat*);
  SymbolModel sym_{"", 1, 2, {{{1, 0}, Expr::constant(1.0)}}};
  Bicharacteristic curve_;
  double t_lo_ = 0.0, T_ = 0.0;
  OdePath riccati_;  // packed complex upper triangle of H over [0, T]
  std::vector<double> ts_;
  std::vector<CMat> H_;
  std::vector<Complex> b_, beta_;
  std::vector<Vec> trace_;  // spatial samples for window lookup
  double r_supp_ = 0.0, min_im_ = 0.0;
  bool adjoint_ = false;
  std::vector<double> h_list_;
  BeamOptions opts_;

  void finalize_amplitude();
};

// Builds the frame on the curve-time segment [t_lo, t_hi]; H0 defaults to
// i Id.  Im H is checked positive definite along the whole segment
// (ImaginaryPartLoss otherwise).
BeamFrame build_beam(const SymbolModel& s, const Bicharacteristic& curve, double t_lo,
                     double t_hi, const BeamOptions& opts = {}, const CMat* H0 = nullptr);

double c0_constant(const BeamFrame& f);

// h^{-(n+1)/2} sum w q(x) u(x) conj(v(x)) over the quadrature set.
Complex pairing_value(const BeamFrame& fu, const BeamFrame& fv, const Expr& q, double h,
                      const QuadratureSet& quad);
// c0 int_0^T q(x(t)) exp[-i int_0^t (p_{m-1} - ~p_{m-1})] dt.
Complex concentration_reference(const BeamFrame& fu, const BeamFrame& fv, const Expr& q);

struct ResidualRow {
  double h = 0.0;
  double residual_norm = 0.0;  // ||P u_h||_{L2(tube)}
  double u_norm = 0.0;         // ||u_h||_{L2(tube)}
  double normalized = 0.0;     // h^m ||P u|| / ||u||
};

struct ResidualStudy {
  std::vector<ResidualRow> rows;
  double fitted_residual_order = 0.0;  // slope of log(normalized) vs log h
  double fitted_norm_exponent = 0.0;   // slope of log ||u|| vs log h
};

struct ResidualOptions {
  std::vector<double> h_list = {0.1, 0.05, 0.025, 0.0125};
  double s_lo = 0.0, s_hi = 0.0;  // frame-time window for the tube
  double radius = 0.0;            // 0 -> 2.5 transverse widths at h_max
  double spacing = 0.0;           // 0 -> 0.4 transverse widths at h_min
  double quad_tol = 3e-9;         // evaluator tolerance under the FD stencil
  double fd_step_factor = 1e-2;   // stencil step = factor * h
  bool norms_only = false;        // skip P u (norm-scaling studies)
};

ResidualStudy residual_study(const BeamFrame& f, const Domain& d, const ResidualOptions& opts);

struct BeamIdentityReport {
  // (i)  det M(s) = alpha0 det Im H(s) with M(s) the (n+1) phase Hessian
  // (ii) f(s) = (i/2) (Im H)^{-1} rho . conj(rho), rho = H xdot - xidot,
  //      constant in s
  // (iii) det Im H(t) = exp[-2 int_0^t tr(C Re H + B)]
  double worst_det_identity = 0.0;
  double worst_f_constancy = 0.0;
  double worst_det_exponential = 0.0;
  int argmax_det = 0, argmax_f = 0, argmax_exp = 0;
  double worst() const;
};

// Throws IdentityViolation when the worst relative error exceeds fail_tol
// (pass +inf to only report).
BeamIdentityReport beam_identities(const BeamFrame& f, double fail_tol);

}  // namespace rptlab
