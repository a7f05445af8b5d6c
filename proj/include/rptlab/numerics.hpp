#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace rptlab {

using Complex = std::complex<double>;

// Pairwise (cascade) summation; fixed order for reproducible reductions.
double pairwise_sum(std::span<const double> v);
Complex pairwise_sum(std::span<const Complex> v);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

// C^2 cutoff: 1 on [0, 1/2], 0 on [1, inf), quintic transition in between.
double smooth_bump(double r);

double ipow(double x, int e);

// Adaptive Gauss quadrature (7/15 point pair).  Panels refine worst-first
// until the summed error estimate drops below
// max(abs_tol, rel_tol * |integral|); the relative target uses the global
// value, so cancelling or negligible panels do not force refinement.  Throws
// QuadratureNonconvergence once a panel would exceed max_depth halvings.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol = 0.0, int max_depth = 40);
Complex adaptive_integrate_c(const std::function<Complex(double)>& f, double a, double b,
                             double abs_tol, double rel_tol = 0.0, int max_depth = 40);
// Same rule over a union of disjoint segments sharing one error budget.
Complex adaptive_integrate_segments(const std::function<Complex(double)>& f,
                                    const std::vector<std::pair<double, double>>& segments,
                                    double abs_tol, double rel_tol, int max_depth);

// 5-point Gauss-Lobatto approximation of the integral over [a, b].
double lobatto5(const std::function<double(double)>& f, double a, double b);
Complex lobatto5_c(const std::function<Complex(double)>& f, double a, double b);

// Evaluates f(0..n-1) concurrently; results land in index order, so reductions
// over the output stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

// All complex roots of a real polynomial given by ascending coefficients,
// via companion-matrix eigenvalues.  Leading coefficient must be nonzero.
std::vector<Complex> poly_roots(std::span<const double> coeffs_ascending);

}  // namespace rptlab
