#include "rptlab/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <queue>
#include <thread>

#include "rptlab/errors.hpp"

namespace rptlab {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGL7Node[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                                0.0,                 0.4058451513773972,  0.7415311855993945,
                                0.9491079123427585};
constexpr double kGL7Weight[7] = {0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
                                  0.4179591836734694, 0.3818300505051189, 0.2797053914892766,
                                  0.1294849661688697};

constexpr double kGL15Node[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601700,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601700,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGL15Weight[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

template <class T>
T sum_pairwise(const T* v, std::size_t n) {
  if (n == 0) return T(0);
  if (n <= 8) {
    T s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return sum_pairwise(v, half) + sum_pairwise(v + half, n - half);
}

template <class T>
void gauss_pair(const std::function<T(double)>& f, double a, double b, T& g7, T& g15) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  T s7(0), s15(0);
  for (int i = 0; i < 7; ++i) s7 += kGL7Weight[i] * f(mid + half * kGL7Node[i]);
  for (int i = 0; i < 15; ++i) s15 += kGL15Weight[i] * f(mid + half * kGL15Node[i]);
  g7 = half * s7;
  g15 = half * s15;
}

template <class T>
struct QuadPanel {
  double a, b;
  T g15;
  double err;
  int depth;
  bool alive;
};

// Worst-panel-first refinement against a global error target.  Running totals
// are incremental; the returned value is re-summed over surviving panels in
// creation order so the reduction stays deterministic.
template <class T>
T adaptive_impl(const std::function<T(double)>& f,
                const std::vector<std::pair<double, double>>& segments, double abs_tol,
                double rel_tol, int max_depth) {
  std::vector<QuadPanel<T>> panels;
  std::priority_queue<std::pair<double, long>> queue;  // (err, -index)
  T total(0);
  double err_total = 0.0;

  auto make_panel = [&](double a, double b, int depth) {
    T g7, g15;
    gauss_pair(f, a, b, g7, g15);
    double e = std::abs(g15 - g7);
    panels.push_back({a, b, g15, e, depth, true});
    queue.emplace(e, -static_cast<long>(panels.size() - 1));
    total += g15;
    err_total += e;
  };

  for (auto [a, b] : segments) {
    const int seed = 4;
    for (int i = 0; i < seed; ++i)
      make_panel(a + (b - a) * i / seed, a + (b - a) * (i + 1) / seed, 0);
  }

  const size_t max_panels = 400000;
  while (err_total > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (queue.empty()) break;
    auto [err, negidx] = queue.top();
    queue.pop();
    QuadPanel<T>& p = panels[static_cast<size_t>(-negidx)];
    if (p.depth >= max_depth || panels.size() >= max_panels)
      throw QuadratureNonconvergence("adaptive panel budget exhausted");
    p.alive = false;
    total -= p.g15;
    err_total -= p.err;
    double a = p.a, b = p.b, mid = 0.5 * (p.a + p.b);
    int depth = p.depth;
    make_panel(a, mid, depth + 1);  // may invalidate p
    make_panel(mid, b, depth + 1);
  }

  T sum(0);
  for (const auto& p : panels)
    if (p.alive) sum += p.g15;
  return sum;
}

template <class T>
T lobatto5_impl(const std::function<T(double)>& f, double a, double b) {
  constexpr double node = 0.6546536707079771;  // sqrt(3/7)
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  T s = (1.0 / 10.0) * (f(a) + f(b));
  s += (49.0 / 90.0) * (f(mid - half * node) + f(mid + half * node));
  s += (32.0 / 45.0) * f(mid);
  return half * s;
}

}  // namespace

double pairwise_sum(std::span<const double> v) { return sum_pairwise(v.data(), v.size()); }
Complex pairwise_sum(std::span<const Complex> v) { return sum_pairwise(v.data(), v.size()); }

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double smooth_bump(double r) {
  if (r <= 0.5) return 1.0;
  if (r >= 1.0) return 0.0;
  double s = 2.0 * (r - 0.5);
  return 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double ipow(double x, int e) {
  if (e == 0) return 1.0;
  bool inv = e < 0;
  unsigned k = inv ? static_cast<unsigned>(-(long long)e) : static_cast<unsigned>(e);
  double r = 1.0, base = x;
  while (k > 0) {
    if (k & 1u) r *= base;
    base *= base;
    k >>= 1u;
  }
  return inv ? 1.0 / r : r;
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol, int max_depth) {
  return adaptive_impl<double>(f, {{a, b}}, abs_tol, rel_tol, max_depth);
}

Complex adaptive_integrate_c(const std::function<Complex(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_depth) {
  return adaptive_impl<Complex>(f, {{a, b}}, abs_tol, rel_tol, max_depth);
}

Complex adaptive_integrate_segments(const std::function<Complex(double)>& f,
                                    const std::vector<std::pair<double, double>>& segments,
                                    double abs_tol, double rel_tol, int max_depth) {
  if (segments.empty()) return Complex(0);
  return adaptive_impl<Complex>(f, segments, abs_tol, rel_tol, max_depth);
}

double lobatto5(const std::function<double(double)>& f, double a, double b) {
  return lobatto5_impl<double>(f, a, b);
}

Complex lobatto5_c(const std::function<Complex(double)>& f, double a, double b) {
  return lobatto5_impl<Complex>(f, a, b);
}

std::vector<Complex> poly_roots(std::span<const double> coeffs) {
  if (coeffs.size() < 2) return {};
  const std::size_t deg = coeffs.size() - 1;
  const double lead = coeffs[deg];
  if (lead == 0.0) throw ConfigError("poly_roots: zero leading coefficient");
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<long>(deg), static_cast<long>(deg));
  for (std::size_t i = 1; i < deg; ++i) comp(static_cast<long>(i), static_cast<long>(i - 1)) = 1.0;
  for (std::size_t i = 0; i < deg; ++i)
    comp(static_cast<long>(i), static_cast<long>(deg - 1)) = -coeffs[i] / lead;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
  std::vector<Complex> roots(deg);
  for (std::size_t i = 0; i < deg; ++i) roots[i] = es.eigenvalues()[static_cast<long>(i)];
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(1, n)));
  if (workers <= 1 || n < 32) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < n; i += workers) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace rptlab
