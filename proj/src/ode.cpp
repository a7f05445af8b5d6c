#include "rptlab/ode.hpp"

#include <algorithm>
#include <cmath>

#include "rptlab/errors.hpp"

namespace rptlab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
// e = b5 - b4 (embedded error weights).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension weights (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

}  // namespace

Eigen::VectorXd OdeStep::eval(double t) const {
  Eigen::VectorXd out;
  eval_into(t, out);
  return out;
}

void OdeStep::eval_into(double t, Eigen::VectorXd& out) const {
  const double h = width;
  const double th = (h == 0.0) ? 0.0 : (t - t0) / h;
  const double th1 = 1.0 - th;
  out = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

const OdeStep& OdePath::locate(double t) const {
  const bool fwd = steps_.back().t1 >= steps_.front().t0;
  size_t lo = 0, hi = steps_.size();
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    bool before = fwd ? (t < steps_[mid].t0) : (t > steps_[mid].t0);
    if (before)
      hi = mid;
    else
      lo = mid;
  }
  return steps_[lo];
}

Eigen::VectorXd OdePath::eval(double t) const { return locate(t).eval(t); }

void OdePath::eval_into(double t, Eigen::VectorXd& out) const { locate(t).eval_into(t, out); }

void OdePath::trim_to(double t_stop) {
  const bool fwd = steps_.back().t1 >= steps_.front().t0;
  while (steps_.size() > 1) {
    const OdeStep& last = steps_.back();
    bool contains = fwd ? (t_stop >= last.t0) : (t_stop <= last.t0);
    if (contains) break;
    steps_.pop_back();
  }
  steps_.back().t1 = t_stop;
}

Dopri5::Dopri5(OdeRhs rhs, double t0, Eigen::VectorXd y0, double direction, OdeOptions opts)
    : rhs_(std::move(rhs)), opts_(opts), t_(t0), dir_(direction >= 0 ? 1.0 : -1.0),
      y_(std::move(y0)) {
  k1_.resizeLike(y_);
  rhs_(t_, y_, k1_);
  have_k1_ = true;
  if (opts_.h_init > 0) {
    h_ = opts_.h_init;
  } else {
    // Crude first-step guess from the RHS scale; the controller fixes it up.
    double ynorm = std::max(y_.norm(), 1e-6);
    double fnorm = std::max(k1_.norm(), 1e-10);
    h_ = std::min(1e-2, 1e-2 * ynorm / fnorm);
    h_ = std::max(h_, 1e-10);
  }
  if (opts_.h_max > 0) h_ = std::min(h_, opts_.h_max);
}

const OdeStep& Dopri5::step() {
  const int n = static_cast<int>(y_.size());
  Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  for (;;) {
    if (++n_steps_ > opts_.max_steps)
      throw QuadratureNonconvergence("ODE step budget exhausted");
    const double h = dir_ * h_;

    ytmp = y_ + h * (a21 * k1_);
    rhs_(t_ + c2 * h, ytmp, k2);
    ytmp = y_ + h * (a31 * k1_ + a32 * k2);
    rhs_(t_ + c3 * h, ytmp, k3);
    ytmp = y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3);
    rhs_(t_ + c4 * h, ytmp, k4);
    ytmp = y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t_ + c5 * h, ytmp, k5);
    ytmp = y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs_(t_ + h, ytmp, k6);
    ynew = y_ + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs_(t_ + h, ynew, k7);

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
      double sk = opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(ynew[i]));
      double ei = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                       e7 * k7[i]);
      err += (ei / sk) * (ei / sk);
    }
    err = std::sqrt(err / n);

    double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.2);
    fac = std::clamp(fac, 0.2, 5.0);
    double h_next = h_ * fac;
    if (opts_.h_max > 0) h_next = std::min(h_next, opts_.h_max);

    if (err <= 1.0) {
      last_.t0 = t_;
      last_.t1 = t_ + h;
      last_.width = h;
      last_.r1 = y_;
      last_.r2 = ynew - y_;
      last_.r3 = h * k1_ - last_.r2;
      last_.r4 = last_.r2 - h * k7 - last_.r3;
      last_.r5 = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      t_ += h;
      y_.swap(ynew);
      k1_.swap(k7);  // FSAL
      h_ = h_next;
      return last_;
    }
    h_ = h_next;
    if (h_ < 1e-14)
      throw QuadratureNonconvergence("ODE step size underflow at t=" + std::to_string(t_));
  }
}

}  // namespace rptlab
