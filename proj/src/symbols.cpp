#include "rptlab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>

#include "rptlab/errors.hpp"

namespace rptlab {

namespace {

std::span<const double> as_span(const Vec& v) {
  return std::span<const double>(v.data(), static_cast<size_t>(v.size()));
}

int abs_alpha(const std::vector<int>& alpha) {
  int s = 0;
  for (int a : alpha) s += a;
  return s;
}

double monomial(const Vec& xi, const std::vector<int>& alpha) {
  double r = 1.0;
  for (size_t i = 0; i < alpha.size(); ++i) r *= ipow(xi[static_cast<long>(i)], alpha[i]);
  return r;
}

Complex monomial_c(const CVec& xi, const std::vector<int>& alpha) {
  Complex r = 1.0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    Complex base = xi[static_cast<long>(i)];
    for (int k = 0; k < alpha[i]; ++k) r *= base;
  }
  return r;
}

// d(xi^alpha)/d(xi_a)
double monomial_d(const Vec& xi, const std::vector<int>& alpha, int a) {
  if (alpha[static_cast<size_t>(a)] == 0) return 0.0;
  double r = static_cast<double>(alpha[static_cast<size_t>(a)]);
  for (size_t i = 0; i < alpha.size(); ++i) {
    int e = alpha[i] - (static_cast<int>(i) == a ? 1 : 0);
    r *= ipow(xi[static_cast<long>(i)], e);
  }
  return r;
}

Complex monomial_d_c(const CVec& xi, const std::vector<int>& alpha, int a) {
  if (alpha[static_cast<size_t>(a)] == 0) return 0.0;
  Complex r = static_cast<double>(alpha[static_cast<size_t>(a)]);
  for (size_t i = 0; i < alpha.size(); ++i) {
    int e = alpha[i] - (static_cast<int>(i) == a ? 1 : 0);
    Complex base = xi[static_cast<long>(i)];
    Complex p = 1.0;
    for (int k = 0; k < e; ++k) p *= base;
    r *= p;
  }
  return r;
}

// d2(xi^alpha)/d(xi_a)d(xi_b)
double monomial_dd(const Vec& xi, const std::vector<int>& alpha, int a, int b) {
  std::vector<int> al = alpha;
  double factor = static_cast<double>(al[static_cast<size_t>(a)]);
  if (factor == 0.0) return 0.0;
  al[static_cast<size_t>(a)] -= 1;
  factor *= static_cast<double>(al[static_cast<size_t>(b)]);
  if (factor == 0.0) return 0.0;
  al[static_cast<size_t>(b)] -= 1;
  double r = factor;
  for (size_t i = 0; i < al.size(); ++i) r *= ipow(xi[static_cast<long>(i)], al[i]);
  return r;
}

}  // namespace

SymbolModel::SymbolModel(std::string name, int order, int dim, std::vector<SymbolTerm> principal,
                         std::vector<ComplexTerm> subleading, Expr v_re, Expr v_im)
    : name_(std::move(name)), order_(order), dim_(dim), principal_(std::move(principal)),
      subleading_(std::move(subleading)), v_re_(std::move(v_re)), v_im_(std::move(v_im)) {
  if (order_ < 1) throw ConfigError("operator order must be >= 1");
  if (dim_ < 2 || dim_ > 3) throw ConfigError("dimension must be 2 or 3");
  if (principal_.empty()) throw ConfigError("principal part is empty");
  for (const auto& t : principal_) {
    if (static_cast<int>(t.alpha.size()) != dim_ || abs_alpha(t.alpha) != order_)
      throw ConfigError("principal multi-index must have |alpha| = m");
    if (t.coeff.max_axis() >= dim_) throw ConfigError("coefficient references unknown variable");
  }
  for (const auto& t : subleading_) {
    if (static_cast<int>(t.alpha.size()) != dim_ || abs_alpha(t.alpha) != order_ - 1)
      throw ConfigError("subleading multi-index must have |alpha| = m-1");
  }
  cache_.reserve(principal_.size());
  for (const auto& t : principal_) {
    TermCache c;
    c.alpha = t.alpha;
    c.coeff = t.coeff.folded();
    for (int j = 0; j < dim_; ++j) c.grad.push_back(c.coeff.diff(j));
    c.hess.resize(static_cast<size_t>(dim_));
    for (int j = 0; j < dim_; ++j)
      for (int k = j; k < dim_; ++k) c.hess[static_cast<size_t>(j)].push_back(c.grad[static_cast<size_t>(j)].diff(k));
    cache_.push_back(std::move(c));
  }
}

double SymbolModel::principal(const Vec& x, const Vec& xi) const {
  double s = 0;
  for (const auto& t : cache_) s += t.coeff.eval(as_span(x)) * monomial(xi, t.alpha);
  return s;
}

Complex SymbolModel::principal_c(const Vec& x, const CVec& xi) const {
  Complex s = 0;
  for (const auto& t : cache_) s += t.coeff.eval(as_span(x)) * monomial_c(xi, t.alpha);
  return s;
}

Vec SymbolModel::d_xi_principal(const Vec& x, const Vec& xi) const {
  Vec g = Vec::Zero(dim_);
  for (const auto& t : cache_) {
    double c = t.coeff.eval(as_span(x));
    for (int a = 0; a < dim_; ++a) g[a] += c * monomial_d(xi, t.alpha, a);
  }
  return g;
}

Vec SymbolModel::d_x_principal(const Vec& x, const Vec& xi) const {
  Vec g = Vec::Zero(dim_);
  for (const auto& t : cache_) {
    double mono = monomial(xi, t.alpha);
    for (int j = 0; j < dim_; ++j) g[j] += t.grad[static_cast<size_t>(j)].eval(as_span(x)) * mono;
  }
  return g;
}

CVec SymbolModel::d_xi_principal_c(const Vec& x, const CVec& xi) const {
  CVec g = CVec::Zero(dim_);
  for (const auto& t : cache_) {
    double c = t.coeff.eval(as_span(x));
    for (int a = 0; a < dim_; ++a) g[a] += c * monomial_d_c(xi, t.alpha, a);
  }
  return g;
}

CVec SymbolModel::d_x_principal_c(const Vec& x, const CVec& xi) const {
  CVec g = CVec::Zero(dim_);
  for (const auto& t : cache_) {
    Complex mono = monomial_c(xi, t.alpha);
    for (int j = 0; j < dim_; ++j) g[j] += t.grad[static_cast<size_t>(j)].eval(as_span(x)) * mono;
  }
  return g;
}

HessianBlocks SymbolModel::hessian_blocks(const Vec& x, const Vec& xi) const {
  HessianBlocks h;
  h.D = Mat::Zero(dim_, dim_);
  h.B = Mat::Zero(dim_, dim_);
  h.C = Mat::Zero(dim_, dim_);
  for (const auto& t : cache_) {
    double c = t.coeff.eval(as_span(x));
    double mono = monomial(xi, t.alpha);
    for (int j = 0; j < dim_; ++j) {
      double cj = t.grad[static_cast<size_t>(j)].eval(as_span(x));
      for (int a = 0; a < dim_; ++a) h.B(j, a) += cj * monomial_d(xi, t.alpha, a);
      for (int k = j; k < dim_; ++k) {
        double cjk = t.hess[static_cast<size_t>(j)][static_cast<size_t>(k - j)].eval(as_span(x));
        h.D(j, k) += cjk * mono;
        if (k != j) h.D(k, j) += cjk * mono;
      }
    }
    for (int a = 0; a < dim_; ++a)
      for (int b = a; b < dim_; ++b) {
        double v = c * monomial_dd(xi, t.alpha, a, b);
        h.C(a, b) += v;
        if (b != a) h.C(b, a) += v;
      }
  }
  return h;
}

Complex SymbolModel::lower(const Vec& x, const Vec& xi) const {
  Complex s = 0;
  for (const auto& t : subleading_)
    s += Complex(t.re.eval(as_span(x)), t.im.eval(as_span(x))) * monomial(xi, t.alpha);
  return s;
}

Complex SymbolModel::lower_c(const Vec& x, const CVec& xi) const {
  Complex s = 0;
  for (const auto& t : subleading_)
    s += Complex(t.re.eval(as_span(x)), t.im.eval(as_span(x))) * monomial_c(xi, t.alpha);
  return s;
}

Complex SymbolModel::zeroth(const Vec& x) const {
  if (order_ == 1) {
    Vec xi = Vec::Zero(dim_);
    return lower(x, xi);
  }
  return Complex(v_re_.eval(as_span(x)), v_im_.eval(as_span(x)));
}

bool SymbolModel::is_null(const Vec& x, const Vec& xi, double tol) const {
  double scale = std::pow(std::max(xi.norm(), 1e-300), order_);
  return std::abs(principal(x, xi)) <= tol * scale;
}

std::vector<double> SymbolModel::normal_char_poly(const Vec& x_b, const Vec& xi_tan,
                                                  const Vec& nu) const {
  if (std::abs(xi_tan.dot(nu)) > 1e-10 * std::max(1.0, xi_tan.norm()))
    throw ConfigError("xi_tan is not tangential (xi_tan . nu != 0)");
  std::vector<double> coeffs(static_cast<size_t>(order_) + 1, 0.0);
  for (const auto& t : cache_) {
    double c = t.coeff.eval(as_span(x_b));
    // Expand prod_i (xi_tan_i + tau nu_i)^{alpha_i} by convolving binomials.
    std::vector<double> poly{1.0};
    for (int i = 0; i < dim_; ++i) {
      int ai = t.alpha[static_cast<size_t>(i)];
      if (ai == 0) continue;
      std::vector<double> bin(static_cast<size_t>(ai) + 1);
      double comb = 1.0;
      for (int j = 0; j <= ai; ++j) {
        bin[static_cast<size_t>(j)] = comb * ipow(xi_tan[i], ai - j) * ipow(nu[i], j);
        comb = comb * (ai - j) / (j + 1.0);
      }
      std::vector<double> next(poly.size() + static_cast<size_t>(ai), 0.0);
      for (size_t p = 0; p < poly.size(); ++p)
        for (size_t q = 0; q < bin.size(); ++q) next[p + q] += poly[p] * bin[q];
      poly.swap(next);
    }
    for (size_t k = 0; k < poly.size(); ++k) coeffs[k] += c * poly[k];
  }
  double scale = 0.0;
  for (double v : coeffs) scale = std::max(scale, std::abs(v));
  if (std::abs(coeffs.back()) <= 1e-12 * std::max(1.0, scale))
    throw CharacteristicBoundary("leading coefficient p_m(x_b, nu) vanishes; degree drops");
  return coeffs;
}

Complex SymbolModel::apply_fd(const std::function<Complex(const Vec&)>& u, const Vec& x,
                              double step) const {
  // D^alpha u by recursive central differences at a given stencil step.
  std::function<Complex(const std::vector<int>&, const Vec&, double)> deriv =
      [&](const std::vector<int>& alpha, const Vec& at, double h) -> Complex {
    int j = -1;
    for (int i = 0; i < dim_; ++i)
      if (alpha[static_cast<size_t>(i)] > 0) {
        j = i;
        break;
      }
    if (j < 0) return u(at);
    std::vector<int> rest = alpha;
    rest[static_cast<size_t>(j)] -= 1;
    Vec xp = at, xm = at;
    xp[j] += h;
    xm[j] -= h;
    return (deriv(rest, xp, h) - deriv(rest, xm, h)) / (2.0 * h);
  };

  auto assemble = [&](double h) -> Complex {
    Complex total = 0;
    const Complex mi(0.0, -1.0);
    for (const auto& t : principal_) {
      Complex factor = t.coeff.eval(as_span(x));
      for (int k = 0; k < abs_alpha(t.alpha); ++k) factor *= mi;
      total += factor * deriv(t.alpha, x, h);
    }
    for (const auto& t : subleading_) {
      Complex factor(t.re.eval(as_span(x)), t.im.eval(as_span(x)));
      for (int k = 0; k < abs_alpha(t.alpha); ++k) factor *= mi;
      total += factor * deriv(t.alpha, x, h);
    }
    if (order_ > 1) total += Complex(v_re_.eval(as_span(x)), v_im_.eval(as_span(x))) * u(x);
    return total;
  };

  Complex coarse = assemble(step);
  Complex fine = assemble(0.5 * step);
  return (4.0 * fine - coarse) / 3.0;
}

Complex subprincipal_diff(const SymbolModel& s1, const SymbolModel& s2, const Vec& x,
                          const Vec& xi) {
  if (s1.order() != s2.order() || s1.dim() != s2.dim())
    throw PrincipalMismatch("operators differ in order or dimension");
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int dim = s1.dim();
  for (int trial = 0; trial < 32; ++trial) {
    Vec xs(dim), xis(dim);
    for (int j = 0; j < dim; ++j) {
      xs[j] = x[j] + 0.5 * u(rng);
      xis[j] = u(rng);
    }
    if (xis.norm() < 0.1) xis.setOnes();
    double p1 = s1.principal(xs, xis);
    double p2 = s2.principal(xs, xis);
    double scale = std::max({std::abs(p1), std::abs(p2), 1.0});
    if (std::abs(p1 - p2) > 1e-10 * scale)
      throw PrincipalMismatch("principal symbols differ at a sampled phase point");
  }
  return s1.lower(x, xi) - s2.lower(x, xi);
}

SymbolModel make_wave1d(Expr c) {
  std::vector<SymbolTerm> pr;
  pr.push_back({{0, 2}, Expr::constant(1.0)});
  pr.push_back({{2, 0}, -(c * c)});
  return SymbolModel("wave1d", 2, 2, std::move(pr));
}

SymbolModel make_wave2d(Expr c) {
  std::vector<SymbolTerm> pr;
  pr.push_back({{0, 2, 0}, Expr::constant(1.0)});
  pr.push_back({{0, 0, 2}, Expr::constant(1.0)});
  pr.push_back({{2, 0, 0}, -(c * c)});
  return SymbolModel("wave2d", 2, 3, std::move(pr));
}

SymbolModel make_tricomi() {
  std::vector<SymbolTerm> pr;
  pr.push_back({{2, 0}, Expr::variable(1)});
  pr.push_back({{0, 2}, Expr::constant(1.0)});
  return SymbolModel("tricomi", 2, 2, std::move(pr));
}

SymbolModel make_laplace(int dim) {
  std::vector<SymbolTerm> pr;
  for (int j = 0; j < dim; ++j) {
    std::vector<int> alpha(static_cast<size_t>(dim), 0);
    alpha[static_cast<size_t>(j)] = 2;
    pr.push_back({alpha, Expr::constant(1.0)});
  }
  return SymbolModel("laplace", 2, dim, std::move(pr));
}

SymbolModel make_transport(std::vector<Expr> field, Expr v_re, Expr v_im) {
  const int dim = static_cast<int>(field.size());
  std::vector<SymbolTerm> pr;
  for (int j = 0; j < dim; ++j) {
    std::vector<int> alpha(static_cast<size_t>(dim), 0);
    alpha[static_cast<size_t>(j)] = 1;
    pr.push_back({alpha, field[static_cast<size_t>(j)]});
  }
  std::vector<ComplexTerm> sub;
  sub.push_back({std::vector<int>(static_cast<size_t>(dim), 0), v_re, v_im});
  return SymbolModel("transport", 1, dim, std::move(pr), std::move(sub));
}

SymbolModel make_magneticwave(Expr a1, Expr a2) {
  // (d + ia)*(d + ia) for the flat metric diag(-1, 1):
  //   p2 = xi2^2 - xi1^2,  p1 = 2<a, xi>_g,  p0 = |a|_g^2 - i div_g a.
  std::vector<SymbolTerm> pr;
  pr.push_back({{0, 2}, Expr::constant(1.0)});
  pr.push_back({{2, 0}, Expr::constant(-1.0)});
  std::vector<ComplexTerm> sub;
  sub.push_back({{1, 0}, -(Expr::constant(2.0) * a1), Expr()});
  sub.push_back({{0, 1}, Expr::constant(2.0) * a2, Expr()});
  Expr p0_re = a2 * a2 - a1 * a1;
  Expr p0_im = a1.diff(0) - a2.diff(1);
  return SymbolModel("magneticwave", 2, 2, std::move(pr), std::move(sub), p0_re, p0_im);
}

SymbolModel make_mixed4() {
  std::vector<SymbolTerm> pr;
  pr.push_back({{0, 4}, Expr::constant(1.0)});
  pr.push_back({{4, 0}, Expr::constant(-1.0)});
  return SymbolModel("mixed4", 4, 2, std::move(pr));
}

}  // namespace rptlab
