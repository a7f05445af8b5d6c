#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace rptlab {

struct ExprNode;

// Immutable scalar expression in variables x1..xn.  Grammar: +, -, *, /,
// integer ^, unary -, and sin, cos, exp, log, sqrt, tanh.  Values are shared
// trees; copying is cheap and evaluation is reentrant.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double v);
  static Expr variable(int axis);  // 0-based axis, prints as x{axis+1}

  // Parses `src` with conventional precedence (^ tightest, then unary -, then
  // * /, then + -).  Variables restricted to x1..x{n_vars}.
  static Expr parse(std::string_view src, int n_vars);

  double eval(std::span<const double> x) const;
  // Exact symbolic partial derivative in x{axis+1}; result is constant-folded.
  Expr diff(int axis) const;
  Expr folded() const;
  std::string print() const;

  bool is_zero() const;   // literal 0 after folding
  int max_axis() const;   // largest axis referenced, -1 for constants

  friend Expr operator+(const Expr&, const Expr&);
  friend Expr operator-(const Expr&, const Expr&);
  friend Expr operator*(const Expr&, const Expr&);
  friend Expr operator/(const Expr&, const Expr&);
  friend Expr operator-(const Expr&);
  friend Expr pow_int(const Expr&, int exponent);
  friend Expr sin(const Expr&);
  friend Expr cos(const Expr&);
  friend Expr exp(const Expr&);
  friend Expr log(const Expr&);
  friend Expr sqrt(const Expr&);
  friend Expr tanh(const Expr&);

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const ExprNode> node_;
};

}  // namespace rptlab
