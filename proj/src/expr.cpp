#include "rptlab/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

#include "rptlab/errors.hpp"

namespace rptlab {

struct ExprNode {
  enum class Kind { Num, Var, Add, Sub, Mul, Div, Neg, Pow, Fun };
  enum class Fn { Sin, Cos, Exp, Log, Sqrt, Tanh };

  Kind kind;
  double value = 0.0;  // Num
  int var = 0;         // Var
  int exponent = 0;    // Pow
  Fn fn = Fn::Sin;     // Fun
  std::shared_ptr<const ExprNode> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;
using Kind = ExprNode::Kind;
using Fn = ExprNode::Fn;

NodePtr make_num(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Num;
  n->value = v;
  return n;
}

NodePtr make_var(int axis) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Var;
  n->var = axis;
  return n;
}

NodePtr make_bin(Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_neg(NodePtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Neg;
  n->a = std::move(a);
  return n;
}

NodePtr make_pow(NodePtr a, int e) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Pow;
  n->a = std::move(a);
  n->exponent = e;
  return n;
}

NodePtr make_fun(Fn f, NodePtr a) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Fun;
  n->fn = f;
  n->a = std::move(a);
  return n;
}

double ipow(double x, int e) {
  if (e == 0) return 1.0;
  if (e < 0) {
    if (x == 0.0) throw EvalDomainError("0 raised to a negative power");
    return 1.0 / ipow(x, -e);
  }
  double r = 1.0, base = x;
  int k = e;
  while (k > 0) {
    if (k & 1) r *= base;
    base *= base;
    k >>= 1;
  }
  return r;
}

double eval_node(const ExprNode& n, std::span<const double> x) {
  switch (n.kind) {
    case Kind::Num:
      return n.value;
    case Kind::Var:
      return x[static_cast<size_t>(n.var)];
    case Kind::Add:
      return eval_node(*n.a, x) + eval_node(*n.b, x);
    case Kind::Sub:
      return eval_node(*n.a, x) - eval_node(*n.b, x);
    case Kind::Mul:
      return eval_node(*n.a, x) * eval_node(*n.b, x);
    case Kind::Div: {
      double d = eval_node(*n.b, x);
      if (d == 0.0) throw EvalDomainError("division by zero");
      return eval_node(*n.a, x) / d;
    }
    case Kind::Neg:
      return -eval_node(*n.a, x);
    case Kind::Pow:
      return ipow(eval_node(*n.a, x), n.exponent);
    case Kind::Fun: {
      double v = eval_node(*n.a, x);
      switch (n.fn) {
        case Fn::Sin:
          return std::sin(v);
        case Fn::Cos:
          return std::cos(v);
        case Fn::Exp:
          return std::exp(v);
        case Fn::Log:
          if (v <= 0.0) throw EvalDomainError("log of non-positive value");
          return std::log(v);
        case Fn::Sqrt:
          if (v < 0.0) throw EvalDomainError("sqrt of negative value");
          return std::sqrt(v);
        case Fn::Tanh:
          return std::tanh(v);
      }
      return 0.0;
    }
  }
  return 0.0;
}

bool is_num(const NodePtr& n, double v) { return n->kind == Kind::Num && n->value == v; }

// Constant folding plus the obvious 0/1 identities.  No CAS-style rewriting.
NodePtr fold(const NodePtr& n) {
  switch (n->kind) {
    case Kind::Num:
    case Kind::Var:
      return n;
    case Kind::Neg: {
      NodePtr a = fold(n->a);
      if (a->kind == Kind::Num) return make_num(-a->value);
      if (a->kind == Kind::Neg) return a->a;
      return make_neg(a);
    }
    case Kind::Pow: {
      NodePtr a = fold(n->a);
      if (n->exponent == 0) return make_num(1.0);
      if (n->exponent == 1) return a;
      if (a->kind == Kind::Num && !(a->value == 0.0 && n->exponent < 0))
        return make_num(ipow(a->value, n->exponent));
      return make_pow(a, n->exponent);
    }
    case Kind::Fun: {
      NodePtr a = fold(n->a);
      if (a->kind == Kind::Num) {
        ExprNode tmp = *n;
        tmp.a = a;
        try {
          return make_num(eval_node(tmp, {}));
        } catch (const EvalDomainError&) {
          // keep symbolic; evaluation will report the domain error
        }
      }
      return make_fun(n->fn, a);
    }
    case Kind::Add: {
      NodePtr a = fold(n->a), b = fold(n->b);
      if (is_num(a, 0.0)) return b;
      if (is_num(b, 0.0)) return a;
      if (a->kind == Kind::Num && b->kind == Kind::Num) return make_num(a->value + b->value);
      return make_bin(Kind::Add, a, b);
    }
    case Kind::Sub: {
      NodePtr a = fold(n->a), b = fold(n->b);
      if (is_num(b, 0.0)) return a;
      if (is_num(a, 0.0)) return fold(make_neg(b));
      if (a->kind == Kind::Num && b->kind == Kind::Num) return make_num(a->value - b->value);
      return make_bin(Kind::Sub, a, b);
    }
    case Kind::Mul: {
      NodePtr a = fold(n->a), b = fold(n->b);
      if (is_num(a, 0.0) || is_num(b, 0.0)) return make_num(0.0);
      if (is_num(a, 1.0)) return b;
      if (is_num(b, 1.0)) return a;
      if (a->kind == Kind::Num && b->kind == Kind::Num) return make_num(a->value * b->value);
      return make_bin(Kind::Mul, a, b);
    }
    case Kind::Div: {
      NodePtr a = fold(n->a), b = fold(n->b);
      if (is_num(b, 1.0)) return a;
      if (is_num(a, 0.0) && !is_num(b, 0.0)) return make_num(0.0);
      if (a->kind == Kind::Num && b->kind == Kind::Num && b->value != 0.0)
        return make_num(a->value / b->value);
      return make_bin(Kind::Div, a, b);
    }
  }
  return n;
}

NodePtr diff_node(const NodePtr& n, int axis) {
  switch (n->kind) {
    case Kind::Num:
      return make_num(0.0);
    case Kind::Var:
      return make_num(n->var == axis ? 1.0 : 0.0);
    case Kind::Add:
      return make_bin(Kind::Add, diff_node(n->a, axis), diff_node(n->b, axis));
    case Kind::Sub:
      return make_bin(Kind::Sub, diff_node(n->a, axis), diff_node(n->b, axis));
    case Kind::Mul:
      return make_bin(Kind::Add, make_bin(Kind::Mul, diff_node(n->a, axis), n->b),
                      make_bin(Kind::Mul, n->a, diff_node(n->b, axis)));
    case Kind::Div:
      // (u'v - uv') / v^2
      return make_bin(Kind::Div,
                      make_bin(Kind::Sub, make_bin(Kind::Mul, diff_node(n->a, axis), n->b),
                               make_bin(Kind::Mul, n->a, diff_node(n->b, axis))),
                      make_pow(n->b, 2));
    case Kind::Neg:
      return make_neg(diff_node(n->a, axis));
    case Kind::Pow:
      if (n->exponent == 0) return make_num(0.0);
      return make_bin(Kind::Mul, make_num(static_cast<double>(n->exponent)),
                      make_bin(Kind::Mul, make_pow(n->a, n->exponent - 1), diff_node(n->a, axis)));
    case Kind::Fun: {
      NodePtr da = diff_node(n->a, axis);
      switch (n->fn) {
        case Fn::Sin:
          return make_bin(Kind::Mul, make_fun(Fn::Cos, n->a), da);
        case Fn::Cos:
          return make_neg(make_bin(Kind::Mul, make_fun(Fn::Sin, n->a), da));
        case Fn::Exp:
          return make_bin(Kind::Mul, make_fun(Fn::Exp, n->a), da);
        case Fn::Log:
          return make_bin(Kind::Div, da, n->a);
        case Fn::Sqrt:
          return make_bin(Kind::Div, da, make_bin(Kind::Mul, make_num(2.0), make_fun(Fn::Sqrt, n->a)));
        case Fn::Tanh:
          return make_bin(Kind::Mul,
                          make_bin(Kind::Sub, make_num(1.0), make_pow(make_fun(Fn::Tanh, n->a), 2)),
                          da);
      }
      return make_num(0.0);
    }
  }
  return make_num(0.0);
}

int max_axis_node(const ExprNode& n) {
  switch (n.kind) {
    case Kind::Num:
      return -1;
    case Kind::Var:
      return n.var;
    default: {
      int m = n.a ? max_axis_node(*n.a) : -1;
      if (n.b) m = std::max(m, max_axis_node(*n.b));
      return m;
    }
  }
}

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case Kind::Add:
    case Kind::Sub:
      return 1;
    case Kind::Mul:
    case Kind::Div:
      return 2;
    case Kind::Neg:
      return 3;
    case Kind::Pow:
      return 4;
    default:
      return 5;
  }
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& child, int parent_prec, bool force_parens, std::string& out) {
  bool parens = force_parens || precedence(child) < parent_prec;
  if (parens) out += '(';
  print_node(child, out);
  if (parens) out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case Kind::Num: {
      char buf[40];
      if (n.value < 0) {
        std::snprintf(buf, sizeof buf, "(%.17g)", n.value);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
      }
      out += buf;
      break;
    }
    case Kind::Var:
      out += "x" + std::to_string(n.var + 1);
      break;
    case Kind::Add:
      print_child(*n.a, 1, false, out);
      out += " + ";
      print_child(*n.b, 2, false, out);
      break;
    case Kind::Sub:
      print_child(*n.a, 1, false, out);
      out += " - ";
      print_child(*n.b, 2, false, out);
      break;
    case Kind::Mul:
      print_child(*n.a, 2, false, out);
      out += "*";
      print_child(*n.b, 3, false, out);
      break;
    case Kind::Div:
      print_child(*n.a, 2, false, out);
      out += "/";
      print_child(*n.b, 3, false, out);
      break;
    case Kind::Neg:
      out += "-";
      print_child(*n.a, 3, false, out);
      break;
    case Kind::Pow:
      print_child(*n.a, 5, n.a->kind == Kind::Num || n.a->kind == Kind::Neg, out);
      out += "^";
      if (n.exponent < 0) {
        out += "-" + std::to_string(-n.exponent);
      } else {
        out += std::to_string(n.exponent);
      }
      break;
    case Kind::Fun: {
      const char* names[] = {"sin", "cos", "exp", "log", "sqrt", "tanh"};
      out += names[static_cast<int>(n.fn)];
      out += '(';
      print_node(*n.a, out);
      out += ')';
      break;
    }
  }
}

struct Parser {
  std::string_view src;
  size_t pos = 0;
  int n_vars;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg, size_t at) {
    throw SyntaxError(msg + " at byte " + std::to_string(at));
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (eat('+')) {
        lhs = make_bin(Kind::Add, lhs, parse_term());
      } else if (eat('-')) {
        lhs = make_bin(Kind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (eat('*')) {
        lhs = make_bin(Kind::Mul, lhs, parse_unary());
      } else if (eat('/')) {
        lhs = make_bin(Kind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    if (eat('-')) return make_neg(parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    skip_ws();
    if (eat('^')) {
      skip_ws();
      bool negative = eat('-');
      skip_ws();
      size_t start = pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      if (pos == start) fail("expected integer exponent after '^'", start);
      if (pos < src.size() && (src[pos] == '.' || src[pos] == 'e' || src[pos] == 'E'))
        fail("exponent must be an integer", pos);
      int e = 0;
      auto [p, ec] = std::from_chars(src.data() + start, src.data() + pos, e);
      (void)p;
      if (ec != std::errc()) fail("bad integer exponent", start);
      return make_pow(base, negative ? -e : e);
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of input", pos);
    char c = src[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("expected ')'", pos);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected character '") + c + "'", pos);
  }

  NodePtr parse_number() {
    size_t start = pos;
    double v = 0.0;
    auto [p, ec] = std::from_chars(src.data() + pos, src.data() + src.size(), v);
    if (ec != std::errc()) fail("bad numeric literal", start);
    pos = static_cast<size_t>(p - src.data());
    return make_num(v);
  }

  NodePtr parse_identifier() {
    size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name(src.substr(start, pos - start));

    static const std::pair<const char*, Fn> fns[] = {
        {"sin", Fn::Sin}, {"cos", Fn::Cos},   {"exp", Fn::Exp},
        {"log", Fn::Log}, {"sqrt", Fn::Sqrt}, {"tanh", Fn::Tanh}};
    for (const auto& [fname, fkind] : fns) {
      if (name == fname) {
        skip_ws();
        if (!eat('('))
          throw ArityError("function '" + name + "' requires one parenthesized argument (byte " +
                           std::to_string(start) + ")");
        NodePtr arg = parse_expr();
        skip_ws();
        if (pos < src.size() && src[pos] == ',')
          throw ArityError("function '" + name + "' takes exactly one argument (byte " +
                           std::to_string(pos) + ")");
        if (!eat(')')) fail("expected ')'", pos);
        return make_fun(fkind, arg);
      }
    }

    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (size_t i = 1; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
      if (digits) {
        int idx = std::stoi(name.substr(1));
        if (idx < 1 || idx > n_vars)
          throw UnknownIdentifier("variable '" + name + "' out of range (n_vars=" +
                                  std::to_string(n_vars) + ", byte " + std::to_string(start) + ")");
        skip_ws();
        if (pos < src.size() && src[pos] == '(')
          throw ArityError("'" + name + "' is a variable, not a function (byte " +
                           std::to_string(pos) + ")");
        return make_var(idx - 1);
      }
    }
    throw UnknownIdentifier("'" + name + "' at byte " + std::to_string(start));
  }
};

}  // namespace

Expr::Expr() : node_(make_num(0.0)) {}

Expr Expr::constant(double v) { return Expr(make_num(v)); }

Expr Expr::variable(int axis) { return Expr(make_var(axis)); }

Expr Expr::parse(std::string_view src, int n_vars) {
  if (src.empty()) throw SyntaxError("empty expression");
  Parser p{src, 0, n_vars};
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size()) p.fail("trailing input", p.pos);
  return Expr(root);
}

double Expr::eval(std::span<const double> x) const { return eval_node(*node_, x); }

Expr Expr::diff(int axis) const { return Expr(fold(diff_node(node_, axis))); }

Expr Expr::folded() const { return Expr(fold(node_)); }

std::string Expr::print() const {
  std::string out;
  print_node(*node_, out);
  return out;
}

bool Expr::is_zero() const {
  NodePtr f = fold(node_);
  return f->kind == Kind::Num && f->value == 0.0;
}

int Expr::max_axis() const { return max_axis_node(*node_); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(make_bin(Kind::Add, a.node_, b.node_)); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(make_bin(Kind::Sub, a.node_, b.node_)); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(make_bin(Kind::Mul, a.node_, b.node_)); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(make_bin(Kind::Div, a.node_, b.node_)); }
Expr operator-(const Expr& a) { return Expr(make_neg(a.node_)); }
Expr pow_int(const Expr& a, int e) { return Expr(make_pow(a.node_, e)); }
Expr sin(const Expr& a) { return Expr(make_fun(Fn::Sin, a.node_)); }
Expr cos(const Expr& a) { return Expr(make_fun(Fn::Cos, a.node_)); }
Expr exp(const Expr& a) { return Expr(make_fun(Fn::Exp, a.node_)); }
Expr log(const Expr& a) { return Expr(make_fun(Fn::Log, a.node_)); }
Expr sqrt(const Expr& a) { return Expr(make_fun(Fn::Sqrt, a.node_)); }
Expr tanh(const Expr& a) { return Expr(make_fun(Fn::Tanh, a.node_)); }

}  // namespace rptlab
