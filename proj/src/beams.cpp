#include "rptlab/beams.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "rptlab/errors.hpp"
#include "rptlab/numerics.hpp"

namespace rptlab {

namespace {

std::span<const double> as_span(const Vec& v) {
  return std::span<const double>(v.data(), static_cast<size_t>(v.size()));
}

int tri_count(int n) { return n * (n + 1) / 2; }

void pack_h(const CMat& H, Eigen::VectorXd& y) {
  const int n = static_cast<int>(H.rows());
  const int nt = tri_count(n);
  y.resize(2 * nt);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++k) {
      y[k] = H(i, j).real();
      y[nt + k] = H(i, j).imag();
    }
}

CMat unpack_h(const Eigen::VectorXd& y, int n) {
  const int nt = tri_count(n);
  CMat H(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j, ++k) {
      H(i, j) = Complex(y[k], y[nt + k]);
      H(j, i) = H(i, j);
    }
  return H;
}

double min_im_eigenvalue(const CMat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H.imag());
  return es.eigenvalues().minCoeff();
}

Complex transport_b(const SymbolModel& s, bool adjoint, const Vec& x, const Vec& xi,
                    const CMat& H) {
  HessianBlocks blocks = s.hessian_blocks(x, xi);
  Complex tr_ch = (blocks.C * H).trace();
  Complex b = tr_ch / Complex(0.0, 2.0);
  if (adjoint) {
    b += blocks.B.trace() / Complex(0.0, 1.0);
    b += std::conj(s.lower(x, xi));
  } else {
    b += s.lower(x, xi);
  }
  return b;
}

}  // namespace

PhasePoint BeamFrame::phase_point(double s) const { return curve_.at(t_lo_ + s); }

Vec BeamFrame::velocity(double s) const {
  PhasePoint p = phase_point(s);
  return sym_.d_xi_principal(p.x, p.xi);
}

Vec BeamFrame::covelocity(double s) const {
  PhasePoint p = phase_point(s);
  return -sym_.d_x_principal(p.x, p.xi);
}

CMat BeamFrame::H_at(double s) const { return unpack_h(riccati_.eval(s), dim()); }

Complex BeamFrame::b_at(double s) const {
  PhasePoint p = phase_point(s);
  return transport_b(sym_, adjoint_, p.x, p.xi, H_at(s));
}

Complex BeamFrame::beta_at(double s) const {
  // Cubic Hermite between the accumulated sample values, beta' = b.
  auto it = std::upper_bound(ts_.begin(), ts_.end(), s);
  size_t i = (it == ts_.begin()) ? 0 : static_cast<size_t>(it - ts_.begin()) - 1;
  if (i + 1 >= ts_.size()) i = ts_.size() - 2;
  double h = ts_[i + 1] - ts_[i];
  double u = (s - ts_[i]) / h;
  double u2 = u * u, u3 = u2 * u;
  Complex p0 = beta_[i], p1 = beta_[i + 1];
  Complex m0 = b_[i] * h, m1 = b_[i + 1] * h;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * m0 + (-2 * u3 + 3 * u2) * p1 +
         (u3 - u2) * m1;
}

Complex BeamFrame::a0_at(double s) const { return std::exp(Complex(0, -1) * beta_at(s)); }

Complex BeamFrame::phase(const Vec& x, double s) const {
  PhasePoint p = phase_point(s);
  Vec dx = x - p.x;
  CMat H = H_at(s);
  Complex quad = 0;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) quad += H(i, j) * dx[i] * dx[j];
  return p.xi.dot(dx) + 0.5 * quad;
}

Complex BeamFrame::eval(const Vec& x, double h) const {
  return eval(x, h, opts_.quad_rel_tol, opts_.max_panel_depth);
}

Complex BeamFrame::eval(const Vec& x, double h, double rel_tol, int max_depth) const {
  // Active s-intervals where the cutoff can be nonzero.
  std::vector<std::pair<double, double>> windows;
  const size_t N = ts_.size();
  size_t run_start = N;
  for (size_t i = 0; i + 1 < N; ++i) {
    double d0 = (x - trace_[i]).norm();
    double d1 = (x - trace_[i + 1]).norm();
    double move = (trace_[i + 1] - trace_[i]).norm();
    bool active = std::min(d0, d1) <= r_supp_ + move;
    if (active && run_start == N) run_start = i;
    if ((!active || i + 2 == N) && run_start != N) {
      size_t run_end = active ? i + 1 : i;
      windows.emplace_back(ts_[run_start], ts_[run_end]);
      run_start = N;
    }
  }
  if (windows.empty()) return 0.0;

  const int n = dim();
  const int nt = tri_count(n);
  Eigen::VectorXd yc(2 * n), yr(2 * nt);
  double dx[3];

  auto integrand = [&](double s) -> Complex {
    curve_.eval_into(t_lo_ + s, yc);
    double r2 = 0;
    for (int j = 0; j < n; ++j) {
      dx[j] = x[j] - yc[j];
      r2 += dx[j] * dx[j];
    }
    double r = std::sqrt(r2) / r_supp_;
    if (r >= 1.0) return Complex(0, 0);
    riccati_.eval_into(s, yr);
    Complex quad(0, 0);
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++k) {
        double w = (i == j) ? 1.0 : 2.0;
        quad += Complex(yr[k], yr[nt + k]) * (w * dx[i] * dx[j]);
      }
    Complex Phi(0, 0);
    for (int j = 0; j < n; ++j) Phi += yc[n + j] * dx[j];
    Phi += 0.5 * quad;
    Complex expo = Complex(0, 1) * Phi / h - Complex(0, 1) * beta_at(s);
    return std::exp(expo) * smooth_bump(r);
  };

  std::vector<std::pair<double, double>> segs;
  for (auto [a, b] : windows)
    if (b > a) segs.emplace_back(a, b);
  // Absolute floor keeps nodes with negligible |u| from over-refining; the
  // natural on-curve scale of u is ~ sqrt(h).
  double abs_tol = 0.1 * rel_tol * std::sqrt(h);
  return adaptive_integrate_segments(integrand, segs, abs_tol, rel_tol, max_depth);
}

void BeamFrame::finalize_amplitude() {
  const size_t N = ts_.size();
  b_.resize(N);
  for (size_t i = 0; i < N; ++i) {
    PhasePoint p = phase_point(ts_[i]);
    b_[i] = transport_b(sym_, adjoint_, p.x, p.xi, H_[i]);
  }
  beta_.assign(N, 0.0);
  auto b_of = [&](double s) -> Complex {
    PhasePoint p = phase_point(s);
    return transport_b(sym_, adjoint_, p.x, p.xi, unpack_h(riccati_.eval(s), dim()));
  };
  for (size_t i = 0; i + 1 < N; ++i)
    beta_[i + 1] = beta_[i] + lobatto5_c(b_of, ts_[i], ts_[i + 1]);
}

BeamFrame build_beam(const SymbolModel& s, const Bicharacteristic& curve, double t_lo,
                     double t_hi, const BeamOptions& opts, const CMat* H0_in) {
  if (!(t_hi > t_lo)) throw ConfigError("beam segment must have positive length");
  if (t_lo < -curve.tau_minus() - 1e-12 || t_hi > curve.tau_plus() + 1e-12)
    throw ConfigError("beam segment exceeds the curve's maximal interval");
  const int n = s.dim();

  CMat H0 = H0_in ? *H0_in : CMat(Complex(0, 1) * CMat::Identity(n, n));
  if ((H0 - H0.transpose()).norm() > 1e-12) throw ConfigError("H0 must be complex symmetric");
  if (min_im_eigenvalue(H0) <= 1e-12)
    throw ConfigError("Im H0 must be positive definite");

  BeamFrame f;
  f.sym_ = s;
  f.curve_ = curve;
  f.t_lo_ = t_lo;
  f.T_ = t_hi - t_lo;
  f.adjoint_ = opts.adjoint;
  f.h_list_ = opts.h_list;
  f.opts_ = opts;

  // Injectivity of the segment in phase space (coarse pairwise check).
  {
    const int K = 64;
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i <= K; ++i) {
      PhasePoint p = curve.at(t_lo + f.T_ * i / K);
      Eigen::VectorXd y(2 * n);
      y.head(n) = p.x;
      y.tail(n) = p.xi;
      pts.push_back(y);
    }
    for (int i = 0; i <= K; ++i)
      for (int j = i + 2; j <= K; ++j)
        if ((pts[static_cast<size_t>(i)] - pts[static_cast<size_t>(j)]).norm() <
            1e-9 * (1 + pts[static_cast<size_t>(i)].norm()))
          throw ConfigError("bicharacteristic segment is not injective");
  }

  OdeRhs rhs = [&s, &curve, t_lo, n](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    CMat H = unpack_h(y, n);
    PhasePoint p = curve.at(t_lo + t);
    HessianBlocks blocks = s.hessian_blocks(p.x, p.xi);
    CMat Hdot = -(H * blocks.C * H + blocks.B * H + H * blocks.B.transpose() + blocks.D);
    // The flow preserves symmetry; re-symmetrize to keep roundoff out.
    Hdot = 0.5 * (Hdot + Hdot.transpose()).eval();
    pack_h(Hdot, dy);
  };

  Eigen::VectorXd y0;
  pack_h(H0, y0);
  OdeOptions oo;
  oo.rtol = opts.rtol;
  oo.atol = opts.atol;
  oo.h_max = f.T_ / 8;
  Dopri5 stepper(rhs, 0.0, y0, +1.0, oo);
  f.ts_.push_back(0.0);
  f.H_.push_back(H0);
  while (stepper.t() < f.T_) {
    const OdeStep& st = stepper.step();
    f.riccati_.push(st);
    if (st.t1 < f.T_) {
      f.ts_.push_back(st.t1);
      f.H_.push_back(unpack_h(stepper.y(), n));
    }
  }
  f.riccati_.trim_to(f.T_);
  f.ts_.push_back(f.T_);
  f.H_.push_back(unpack_h(f.riccati_.eval(f.T_), n));

  f.min_im_ = 1e300;
  for (const CMat& H : f.H_) f.min_im_ = std::min(f.min_im_, min_im_eigenvalue(H));
  if (f.min_im_ < 1e-10)
    throw ImaginaryPartLoss("min eig Im H = " + std::to_string(f.min_im_));

  f.trace_.reserve(f.ts_.size());
  for (double t : f.ts_) f.trace_.push_back(curve.at(t_lo + t).x);

  if (opts.r_supp > 0) {
    f.r_supp_ = opts.r_supp;
  } else {
    double h_min = *std::min_element(f.h_list_.begin(), f.h_list_.end());
    f.r_supp_ = 6.0 * std::sqrt(h_min / f.min_im_);
  }

  f.finalize_amplitude();
  return f;
}

BeamFrame BeamFrame::adjoint_partner(const SymbolModel& adjoint_of) const {
  BeamFrame g = *this;
  g.sym_ = adjoint_of;
  g.adjoint_ = true;
  g.finalize_amplitude();
  return g;
}

double c0_constant(const BeamFrame& f) {
  Vec xdot = f.velocity(0.0), xidot = f.covelocity(0.0);
  double denom = std::sqrt(xdot.squaredNorm() + xidot.squaredNorm());
  return 2.0 * std::pow(M_PI, (f.dim() + 1) / 2.0) / denom;
}

Complex pairing_value(const BeamFrame& fu, const BeamFrame& fv, const Expr& q, double h,
                      const QuadratureSet& quad) {
  if (quad.spacing > 0.5 * std::sqrt(h))
    throw ResolutionTooCoarse("pairing quadrature spacing " + std::to_string(quad.spacing) +
                              " exceeds sqrt(h)/2");
  if (std::abs(fu.T() - fv.T()) > 1e-12)
    throw ConfigError("pairing frames must share the same segment");
  double q_end0 = std::abs(q.eval(as_span(fu.phase_point(0.0).x)));
  double q_end1 = std::abs(q.eval(as_span(fu.phase_point(fu.T()).x)));
  double q_mid = std::abs(q.eval(as_span(fu.phase_point(0.5 * fu.T()).x)));
  if (q_end0 > 1e-8 * std::max(1.0, q_mid) || q_end1 > 1e-8 * std::max(1.0, q_mid))
    throw ConfigError("pairing weight must vanish near the segment endpoints");

  std::vector<Complex> contrib(quad.nodes.size());
  parallel_for(quad.nodes.size(), [&](std::size_t i) {
    const Vec& xk = quad.nodes[i];
    double qv = q.eval(as_span(xk));
    if (qv == 0.0) {
      contrib[i] = 0.0;
      return;
    }
    Complex u = fu.eval(xk, h);
    Complex v = fv.eval(xk, h);
    contrib[i] = quad.weights[i] * qv * u * std::conj(v);
  });
  Complex total = pairwise_sum(std::span<const Complex>(contrib.data(), contrib.size()));
  return std::pow(h, -(fu.dim() + 1) / 2.0) * total;
}

Complex concentration_reference(const BeamFrame& fu, const BeamFrame& fv, const Expr& q) {
  const SymbolModel& p1 = fu.symbol();
  const SymbolModel& p2 = fv.symbol();
  double T = fu.T();
  auto diff = [&](double s) -> Complex {
    PhasePoint p = fu.phase_point(s);
    return p1.lower(p.x, p.xi) - p2.lower(p.x, p.xi);
  };
  // cumulative exponent on a fixed fine partition
  const int K = 512;
  std::vector<Complex> cum(K + 1, 0.0);
  for (int i = 0; i < K; ++i)
    cum[static_cast<size_t>(i) + 1] =
        cum[static_cast<size_t>(i)] + lobatto5_c(diff, T * i / K, T * (i + 1) / K);
  auto integrand = [&](double t) -> Complex {
    double pos = t / T * K;
    int i = std::min(static_cast<int>(pos), K - 1);
    Complex expn = cum[static_cast<size_t>(i)] + lobatto5_c(diff, T * i / K, t);
    PhasePoint p = fu.phase_point(t);
    return q.eval(as_span(p.x)) * std::exp(Complex(0, -1) * expn);
  };
  Complex integral = adaptive_integrate_c(integrand, 0.0, T, 1e-11, 1e-10);
  return c0_constant(fu) * integral;
}

ResidualStudy residual_study(const BeamFrame& f, const Domain& d, const ResidualOptions& opts) {
  if (opts.h_list.size() < 2) throw ConfigError("residual study needs at least two h values");
  double s_lo = opts.s_lo, s_hi = opts.s_hi > 0 ? opts.s_hi : f.T();
  double h_max = *std::max_element(opts.h_list.begin(), opts.h_list.end());
  double h_min = *std::min_element(opts.h_list.begin(), opts.h_list.end());
  double width_max = std::sqrt(h_max / f.min_im_eig());
  double width_min = std::sqrt(h_min);  // narrowest transverse scale
  double radius = opts.radius > 0 ? opts.radius : 2.5 * width_max;
  double spacing = opts.spacing > 0 ? opts.spacing : 0.4 * width_min;

  const int K = 129;
  std::vector<Vec> seg;
  for (int i = 0; i < K; ++i)
    seg.push_back(f.phase_point(s_lo + (s_hi - s_lo) * i / (K - 1)).x);
  QuadratureSet tube = tube_quadrature(d, seg, radius, spacing);

  const SymbolModel& s = f.symbol();
  const int m = s.order();

  ResidualStudy study;
  for (double h : opts.h_list) {
    std::vector<double> u2(tube.nodes.size()), pu2(tube.nodes.size());
    parallel_for(tube.nodes.size(), [&](std::size_t i) {
      const Vec& xk = tube.nodes[i];
      Complex u = f.eval(xk, h, opts.quad_tol, 24);
      u2[i] = tube.weights[i] * std::norm(u);
      if (!opts.norms_only) {
        auto ueval = [&](const Vec& y) { return f.eval(y, h, opts.quad_tol, 24); };
        Complex pu = s.apply_fd(ueval, xk, opts.fd_step_factor * h);
        pu2[i] = tube.weights[i] * std::norm(pu);
      }
    });
    ResidualRow row;
    row.h = h;
    row.u_norm = std::sqrt(pairwise_sum(std::span<const double>(u2.data(), u2.size())));
    if (!opts.norms_only) {
      row.residual_norm = std::sqrt(pairwise_sum(std::span<const double>(pu2.data(), pu2.size())));
      row.normalized = ipow(h, m) * row.residual_norm / row.u_norm;
    }
    study.rows.push_back(row);
  }

  std::vector<double> hs, rel, un;
  for (const auto& r : study.rows) {
    hs.push_back(r.h);
    rel.push_back(std::max(r.normalized, 1e-300));
    un.push_back(std::max(r.u_norm, 1e-300));
  }
  if (!opts.norms_only) study.fitted_residual_order = loglog_slope(hs, rel);
  study.fitted_norm_exponent = loglog_slope(hs, un);
  return study;
}

double BeamIdentityReport::worst() const {
  return std::max({worst_det_identity, worst_f_constancy, worst_det_exponential});
}

BeamIdentityReport beam_identities(const BeamFrame& f, double fail_tol) {
  const int n = f.dim();
  const auto& ts = f.sample_times();
  const auto& Hs = f.sample_H();

  Vec xdot0 = f.velocity(0.0), xidot0 = f.covelocity(0.0);
  double speed0 = xdot0.squaredNorm() + xidot0.squaredNorm();
  Complex two_i(0.0, 2.0);
  Complex alpha0 = Complex(0, 0.5) * std::pow(two_i, n) * speed0;

  Complex f0;
  BeamIdentityReport rep;

  // cumulative integral for identity (iii)
  auto g_of = [&](double s) -> double {
    PhasePoint p = f.phase_point(s);
    HessianBlocks blocks = f.symbol().hessian_blocks(p.x, p.xi);
    Mat ReH = f.H_at(s).real();
    return (blocks.C * ReH + blocks.B).trace();
  };
  double cum = 0.0;

  for (size_t i = 0; i < ts.size(); ++i) {
    double s = ts[i];
    const CMat& H = Hs[i];
    Mat ImH = H.imag();
    Vec xdot = f.velocity(s), xidot = f.covelocity(s);

    CVec rho = H * xdot.cast<Complex>() - xidot.cast<Complex>();

    // (i) det M(s) = alpha0 det Im H(s)
    CMat M(n + 1, n + 1);
    M.topLeftCorner(n, n) = two_i * ImH.cast<Complex>();
    for (int j = 0; j < n; ++j) {
      M(j, n) = -rho[j];
      M(n, j) = -rho[j];
    }
    CVec rho_dot_x = rho;
    M(n, n) = rho.dot(xdot.cast<Complex>().conjugate());  // rho . xdot (real xdot)
    M(n, n) = 0;
    for (int j = 0; j < n; ++j) M(n, n) += rho[j] * xdot[j];
    Complex detM = M.determinant();
    double detImH = ImH.determinant();
    double err_i = std::abs(detM - alpha0 * detImH) / std::max(std::abs(alpha0 * detImH), 1e-300);
    if (err_i > rep.worst_det_identity) {
      rep.worst_det_identity = err_i;
      rep.argmax_det = static_cast<int>(i);
    }

    // (ii) f(s) constant
    Eigen::LLT<Mat> llt(ImH);
    CVec sol = llt.solve(rho.real()).cast<Complex>() +
               Complex(0, 1) * llt.solve(rho.imag()).cast<Complex>();
    Complex fs = Complex(0, 0.5) * (sol.transpose() * rho.conjugate())(0, 0);
    if (i == 0) f0 = fs;
    double err_ii = std::abs(fs - f0) / std::max(std::abs(f0), 1e-300);
    if (err_ii > rep.worst_f_constancy) {
      rep.worst_f_constancy = err_ii;
      rep.argmax_f = static_cast<int>(i);
    }

    // (iii) det Im H = exp(-2 int tr(C ReH + B))
    if (i > 0) cum += lobatto5(g_of, ts[i - 1], ts[i]);
    double rhs = std::exp(-2.0 * cum) * Hs[0].imag().determinant();
    double err_iii = std::abs(detImH - rhs) / std::max(std::abs(rhs), 1e-300);
    if (err_iii > rep.worst_det_exponential) {
      rep.worst_det_exponential = err_iii;
      rep.argmax_exp = static_cast<int>(i);
    }
  }

  if (rep.worst() > fail_tol)
    throw IdentityViolation("worst relative error " + std::to_string(rep.worst()) +
                            " at samples (det " + std::to_string(rep.argmax_det) + ", f " +
                            std::to_string(rep.argmax_f) + ", exp " +
                            std::to_string(rep.argmax_exp) + ")");
  return rep;
}

}  // namespace rptlab
