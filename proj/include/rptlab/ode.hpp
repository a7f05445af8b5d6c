#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rptlab {

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 -> choose automatically
  double h_max = 0.0;   // 0 -> unlimited
  long max_steps = 2'000'000;
};

// One accepted Dormand-Prince 5(4) step with its order-4 continuous extension.
// t1 may be clipped by OdePath::trim_to; `width` keeps the step size the
// interpolant was built with.
struct OdeStep {
  double t0 = 0.0, t1 = 0.0, width = 0.0;
  Eigen::VectorXd r1, r2, r3, r4, r5;

  Eigen::VectorXd eval(double t) const;
  void eval_into(double t, Eigen::VectorXd& out) const;
};

// Dense piecewise path assembled from accepted steps (monotone in either
// time direction).
class OdePath {
 public:
  void push(const OdeStep& s) { steps_.push_back(s); }
  bool empty() const { return steps_.empty(); }
  double t_begin() const { return steps_.front().t0; }
  double t_end() const { return steps_.back().t1; }
  const std::vector<OdeStep>& steps() const { return steps_; }

  Eigen::VectorXd eval(double t) const;
  void eval_into(double t, Eigen::VectorXd& out) const;
  // Clip the path so it ends exactly at t_stop (t_stop inside the last steps).
  void trim_to(double t_stop);

 private:
  const OdeStep& locate(double t) const;
  std::vector<OdeStep> steps_;
};

// Adaptive Dormand-Prince 5(4) stepper; direction +1/-1.
class Dopri5 {
 public:
  Dopri5(OdeRhs rhs, double t0, Eigen::VectorXd y0, double direction, OdeOptions opts);

  // Advances one accepted step; the reference stays valid until the next call.
  const OdeStep& step();
  double t() const { return t_; }
  const Eigen::VectorXd& y() const { return y_; }

 private:
  OdeRhs rhs_;
  OdeOptions opts_;
  double t_, dir_, h_;
  Eigen::VectorXd y_, k1_;
  bool have_k1_ = false;
  OdeStep last_;
  long n_steps_ = 0;
};

}  // namespace rptlab
