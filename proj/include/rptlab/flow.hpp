#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rptlab/geometry.hpp"
#include "rptlab/ode.hpp"
#include "rptlab/symbols.hpp"

namespace rptlab {

struct PhasePoint {
  Vec x, xi;
};

enum class EndpointKind { BoundaryExit, TrappedCutoff, FiberBlowup };
enum class BoundaryClass { Incoming, Outgoing, Both, Neither };

const char* to_string(EndpointKind k);
const char* to_string(BoundaryClass c);

struct FlowOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double t_max = 100.0;
  double tol_null = 1e-8;       // nullness precondition, relative to |xi|^m
  double tol_boundary = 1e-10;  // bisection target for boundary crossings
  double eps_time = 1e-4;       // probe span separating exits from grazes
  double eps_probe = 1e-4;      // time offset for boundary classification
  double xi_cap = 1e6;
};

// Time-sampled maximal null phase curve through gamma(0) = (x0, xi0), with
// dense output on [-tau_minus, tau_plus].
class Bicharacteristic {
 public:
  int dim() const { return dim_; }
  double tau_plus() const { return t_plus_; }
  double tau_minus() const { return -t_minus_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<PhasePoint>& samples() const { return samples_; }
  EndpointKind forward_end() const { return end_fwd_; }
  EndpointKind backward_end() const { return end_bwd_; }
  bool maximal() const {
    return end_fwd_ == EndpointKind::BoundaryExit && end_bwd_ == EndpointKind::BoundaryExit;
  }
  int tangencies() const { return tangencies_; }
  double max_p_drift() const { return max_p_drift_; }

  PhasePoint at(double t) const;
  Vec x_at(double t) const;
  // Allocation-free dense evaluation into a 2n workspace [x; xi].
  void eval_into(double t, Eigen::VectorXd& y) const;
  // Uniform-in-t resampling of the spatial trace on [t0, t1].
  std::vector<Vec> spatial_polyline(double t0, double t1, int count) const;
  std::vector<Vec> spatial_polyline(int count) const {
    return spatial_polyline(t_minus_, t_plus_, count);
  }

 private:
  friend Bicharacteristic integrate_maximal(const SymbolModel&, const Domain&, const PhasePoint&,
                                            const FlowOptions&);
  int dim_ = 0;
  double t_minus_ = 0.0, t_plus_ = 0.0;
  OdePath fwd_, bwd_;
  std::vector<double> times_;
  std::vector<PhasePoint> samples_;
  EndpointKind end_fwd_ = EndpointKind::BoundaryExit, end_bwd_ = EndpointKind::BoundaryExit;
  int tangencies_ = 0;
  double max_p_drift_ = 0.0;
};

Bicharacteristic integrate_maximal(const SymbolModel& s, const Domain& d, const PhasePoint& p0,
                                   const FlowOptions& opts = {});

BoundaryClass classify_null_boundary(const SymbolModel& s, const Domain& d, const PhasePoint& pb,
                                     const FlowOptions& opts = {});

struct ScatterRecord {
  PhasePoint entry, exit;
  double travel_time = 0.0;
  int tangencies = 0;
  BoundaryClass entry_class = BoundaryClass::Neither;
  BoundaryClass exit_class = BoundaryClass::Neither;
  std::string status = "ok";  // "ok" or the failure name
};

ScatterRecord scattering_relation(const SymbolModel& s, const Domain& d, const PhasePoint& pb,
                                  const FlowOptions& opts = {});

struct BoundarySampling {
  int count = 64;
  double xi_scale = 1.0;
  std::uint64_t seed = 1;
};

// Null boundary phase points built from boundary samples and the real roots
// of the normal characteristic polynomial.
std::vector<PhasePoint> sample_null_boundary_points(const SymbolModel& s, const Domain& d,
                                                    const BoundarySampling& spec);

// One record per sample; per-sample failures are recorded, not fatal.
std::vector<ScatterRecord> scatter_batch(const SymbolModel& s, const Domain& d,
                                         const BoundarySampling& spec,
                                         const FlowOptions& opts = {});

// Boundary point of M hit by the ray from `center` in direction `dir`.
Vec boundary_point_along(const Domain& d, const Vec& center, const Vec& dir);

}  // namespace rptlab
