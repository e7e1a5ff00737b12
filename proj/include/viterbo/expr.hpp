#pragma once

// Closed-form expressions in the variables q, t, lambda, w1..wK with exact
// symbolic differentiation. Trees are immutable and shared.

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viterbo/errors.hpp"

namespace viterbo {

enum class VarKind : std::uint8_t { q, t, lambda, w };

struct Variable {
  VarKind kind = VarKind::q;
  int index = 0;  // 1-based fiber index for VarKind::w, 0 otherwise

  static constexpr Variable base() { return {VarKind::q, 0}; }
  static constexpr Variable time() { return {VarKind::t, 0}; }
  static constexpr Variable lambda() { return {VarKind::lambda, 0}; }
  static constexpr Variable fiber(int i) { return {VarKind::w, i}; }

  std::string name() const {
    switch (kind) {
      case VarKind::q: return "q";
      case VarKind::t: return "t";
      case VarKind::lambda: return "lambda";
      case VarKind::w: return "w" + std::to_string(index);
    }
    return "?";
  }

  friend auto operator<=>(const Variable&, const Variable&) = default;
};

enum class Op : std::uint8_t { constant, variable, add, sub, mul, div, pow, neg, sin, cos, exp };

class Expr;

namespace detail {
struct Node;
}

/// Immutable expression tree handle. Copying is cheap (shared ownership).
class Expr {
 public:
  Expr();  // the constant 0

  static Expr constant(double v);
  static Expr variable(Variable v);
  // Raw constructors: build exactly the requested node.
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr power(Expr base, int exponent);
  static Expr unary(Op op, Expr arg);

  Op op() const;
  double value() const;      // constant nodes
  Variable var() const;      // variable nodes
  int exponent() const;      // pow nodes
  const Expr& lhs() const;   // binary nodes, pow base, unary argument
  const Expr& rhs() const;   // binary nodes

  bool is_constant(double v) const { return op() == Op::constant && value() == v; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Op op = Op::constant;
  double value = 0.0;
  Variable var{};
  int exponent = 0;
  Expr lhs;
  Expr rhs;
};

// The shared zero node is built with null children; every other node gets
// its children assigned here.
struct NodeBuilder {
  static std::shared_ptr<const Node> make(Op op, double value, Variable var, int exponent,
                                          Expr lhs, Expr rhs) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->value = value;
    n->var = var;
    n->exponent = exponent;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }
};
}  // namespace detail

}  // namespace viterbo

namespace viterbo {

inline Expr::Expr() {
  // Lazily-built shared zero. Children of the zero node are empty handles.
  static const std::shared_ptr<const detail::Node> zero = [] {
    auto n = std::shared_ptr<detail::Node>(new detail::Node{Op::constant, 0.0, {}, 0,
                                                            Expr(nullptr), Expr(nullptr)});
    return std::shared_ptr<const detail::Node>(n);
  }();
  node_ = zero;
}

inline Expr Expr::constant(double v) {
  return Expr(detail::NodeBuilder::make(Op::constant, v, {}, 0, Expr(nullptr), Expr(nullptr)));
}

inline Expr Expr::variable(Variable v) {
  return Expr(detail::NodeBuilder::make(Op::variable, 0.0, v, 0, Expr(nullptr), Expr(nullptr)));
}

inline Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  return Expr(detail::NodeBuilder::make(op, 0.0, {}, 0, std::move(lhs), std::move(rhs)));
}

inline Expr Expr::power(Expr base, int exponent) {
  return Expr(
      detail::NodeBuilder::make(Op::pow, 0.0, {}, exponent, std::move(base), Expr(nullptr)));
}

inline Expr Expr::unary(Op op, Expr arg) {
  return Expr(detail::NodeBuilder::make(op, 0.0, {}, 0, std::move(arg), Expr(nullptr)));
}

inline Op Expr::op() const { return node_->op; }
inline double Expr::value() const { return node_->value; }
inline Variable Expr::var() const { return node_->var; }
inline int Expr::exponent() const { return node_->exponent; }
inline const Expr& Expr::lhs() const { return node_->lhs; }
inline const Expr& Expr::rhs() const { return node_->rhs; }

inline bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::constant: return std::bit_cast<std::uint64_t>(a.value()) ==
                              std::bit_cast<std::uint64_t>(b.value());
    case Op::variable: return a.var() == b.var();
    case Op::pow: return a.exponent() == b.exponent() && a.lhs() == b.lhs();
    case Op::neg:
    case Op::sin:
    case Op::cos:
    case Op::exp: return a.lhs() == b.lhs();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

// ---------------------------------------------------------------------------
// Folding constructors, used by differentiate() and by code that assembles
// families programmatically. parse() never folds beyond negative literals.

inline Expr operator-(const Expr& a) {
  if (a.op() == Op::constant) return Expr::constant(-a.value());
  if (a.op() == Op::neg) return a.lhs();
  return Expr::unary(Op::neg, a);
}

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.op() == Op::constant && b.op() == Op::constant) return Expr::constant(a.value() + b.value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::binary(Op::add, a, b);
}

inline Expr operator-(const Expr& a, const Expr& b) {
  if (a.op() == Op::constant && b.op() == Op::constant) return Expr::constant(a.value() - b.value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::binary(Op::sub, a, b);
}

inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.op() == Op::constant && b.op() == Op::constant) return Expr::constant(a.value() * b.value());
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return Expr::binary(Op::mul, a, b);
}

inline Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  return Expr::binary(Op::div, a, b);
}

inline Expr pow(const Expr& base, int n) {
  if (n == 0) return Expr::constant(1.0);
  if (n == 1) return base;
  return Expr::power(base, n);
}

inline Expr sin(const Expr& a) { return Expr::unary(Op::sin, a); }
inline Expr cos(const Expr& a) { return Expr::unary(Op::cos, a); }
inline Expr exp(const Expr& a) { return Expr::unary(Op::exp, a); }

// ---------------------------------------------------------------------------
// Evaluation

/// Variable assignment with explicit "unbound" state.
class Bindings {
 public:
  Bindings() = default;

  Bindings& set(Variable v, double x) {
    slot(v) = x;
    return *this;
  }

  std::optional<double> get(Variable v) const {
    switch (v.kind) {
      case VarKind::q: return q_;
      case VarKind::t: return t_;
      case VarKind::lambda: return lambda_;
      case VarKind::w:
        if (v.index >= 1 && static_cast<std::size_t>(v.index) <= w_.size()) return w_[v.index - 1];
        return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  std::optional<double>& slot(Variable v) {
    switch (v.kind) {
      case VarKind::q: return q_;
      case VarKind::t: return t_;
      case VarKind::lambda: return lambda_;
      case VarKind::w: break;
    }
    if (v.index < 1) throw EvalError("fiber variable index must be >= 1");
    if (static_cast<std::size_t>(v.index) > w_.size()) w_.resize(v.index);
    return w_[v.index - 1];
  }

  std::optional<double> q_, t_, lambda_;
  std::vector<std::optional<double>> w_;
};

/// Fully-bound evaluation point; the fast path used on grids.
struct Point {
  double q = 0.0;
  double t = 0.0;
  double lambda = 0.0;
  std::span<const double> w{};

  double operator()(Variable v) const {
    switch (v.kind) {
      case VarKind::q: return q;
      case VarKind::t: return t;
      case VarKind::lambda: return lambda;
      case VarKind::w:
        if (v.index < 1 || static_cast<std::size_t>(v.index) > w.size())
          throw EvalError("unbound variable " + v.name());
        return w[v.index - 1];
    }
    return 0.0;
  }
};

namespace detail {

inline double int_pow(double x, int n) {
  if (n < 0) {
    if (x == 0.0) throw EvalError("division by zero");
    return 1.0 / int_pow(x, -n);
  }
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= x;
    x *= x;
    n >>= 1;
  }
  return r;
}

template <typename Lookup>
double eval_impl(const Expr& e, const Lookup& lookup) {
  switch (e.op()) {
    case Op::constant: return e.value();
    case Op::variable: return lookup(e.var());
    case Op::add: return eval_impl(e.lhs(), lookup) + eval_impl(e.rhs(), lookup);
    case Op::sub: return eval_impl(e.lhs(), lookup) - eval_impl(e.rhs(), lookup);
    case Op::mul: return eval_impl(e.lhs(), lookup) * eval_impl(e.rhs(), lookup);
    case Op::div: {
      const double den = eval_impl(e.rhs(), lookup);
      if (den == 0.0) throw EvalError("division by zero");
      return eval_impl(e.lhs(), lookup) / den;
    }
    case Op::pow: return int_pow(eval_impl(e.lhs(), lookup), e.exponent());
    case Op::neg: return -eval_impl(e.lhs(), lookup);
    case Op::sin: return std::sin(eval_impl(e.lhs(), lookup));
    case Op::cos: return std::cos(eval_impl(e.lhs(), lookup));
    case Op::exp: return std::exp(eval_impl(e.lhs(), lookup));
  }
  return 0.0;
}

}  // namespace detail

inline double eval(const Expr& e, const Bindings& b) {
  return detail::eval_impl(e, [&b](Variable v) {
    auto x = b.get(v);
    if (!x) throw EvalError("unbound variable " + v.name());
    return *x;
  });
}

inline double eval(const Expr& e, const Point& p) { return detail::eval_impl(e, p); }

inline void collect_variables(const Expr& e, std::set<Variable>& out) {
  switch (e.op()) {
    case Op::constant: return;
    case Op::variable: out.insert(e.var()); return;
    case Op::pow:
    case Op::neg:
    case Op::sin:
    case Op::cos:
    case Op::exp: collect_variables(e.lhs(), out); return;
    default:
      collect_variables(e.lhs(), out);
      collect_variables(e.rhs(), out);
  }
}

inline std::set<Variable> free_variables(const Expr& e) {
  std::set<Variable> out;
  collect_variables(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation

inline Expr differentiate(const Expr& e, Variable v) {
  switch (e.op()) {
    case Op::constant: return Expr::constant(0.0);
    case Op::variable: return Expr::constant(e.var() == v ? 1.0 : 0.0);
    case Op::add: return differentiate(e.lhs(), v) + differentiate(e.rhs(), v);
    case Op::sub: return differentiate(e.lhs(), v) - differentiate(e.rhs(), v);
    case Op::mul:
      return differentiate(e.lhs(), v) * e.rhs() + e.lhs() * differentiate(e.rhs(), v);
    case Op::div: {
      const Expr num = differentiate(e.lhs(), v) * e.rhs() - e.lhs() * differentiate(e.rhs(), v);
      return num / pow(e.rhs(), 2);
    }
    case Op::pow: {
      const Expr d = differentiate(e.lhs(), v);
      if (d.is_constant(0.0)) return Expr::constant(0.0);
      return Expr::constant(e.exponent()) * pow(e.lhs(), e.exponent() - 1) * d;
    }
    case Op::neg: return -differentiate(e.lhs(), v);
    case Op::sin: return cos(e.lhs()) * differentiate(e.lhs(), v);
    case Op::cos: return -(sin(e.lhs()) * differentiate(e.lhs(), v));
    case Op::exp: return e * differentiate(e.lhs(), v);
  }
  return Expr::constant(0.0);
}

// ---------------------------------------------------------------------------
// Printing. The output re-parses to an identical tree.

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::add:
    case Op::sub: return 1;
    case Op::mul:
    case Op::div: return 2;
    case Op::neg: return 3;
    case Op::pow: return 4;
    default: return 5;
  }
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), std::abs(v));
  std::string s(buf.data(), end);
  if (std::signbit(v)) return "(-" + s + ")";
  return s;
}

inline void print_impl(const Expr& e, std::string& out);

inline void print_operand(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print_impl(e, out);
    out += ')';
  } else {
    print_impl(e, out);
  }
}

inline void print_impl(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::constant: out += format_number(e.value()); return;
    case Op::variable: out += e.var().name(); return;
    case Op::add:
    case Op::sub:
      print_operand(e.lhs(), 1, out);
      out += e.op() == Op::add ? '+' : '-';
      print_operand(e.rhs(), 2, out);
      return;
    case Op::mul:
    case Op::div:
      print_operand(e.lhs(), 2, out);
      out += e.op() == Op::mul ? '*' : '/';
      print_operand(e.rhs(), 3, out);
      return;
    case Op::neg:
      out += '-';
      if (e.lhs().op() == Op::constant) {
        out += '(';
        print_impl(e.lhs(), out);
        out += ')';
      } else {
        print_operand(e.lhs(), 3, out);
      }
      return;
    case Op::pow:
      print_operand(e.lhs(), 5, out);
      out += '^';
      if (e.exponent() < 0)
        out += "(-" + std::to_string(-static_cast<long long>(e.exponent())) + ")";
      else
        out += std::to_string(e.exponent());
      return;
    case Op::sin:
    case Op::cos:
    case Op::exp:
      out += e.op() == Op::sin ? "sin(" : e.op() == Op::cos ? "cos(" : "exp(";
      print_impl(e.lhs(), out);
      out += ')';
      return;
  }
}

}  // namespace detail

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print_impl(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' exponent)?
//   exponent := ['-'] INT | '(' ['-'] INT ')'
//   primary  := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, int fiber_dim) : text_(text), fiber_dim_(fiber_dim) {}

  Expr parse() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "'", pos_);
      throw ParseError(std::string("expected '") + c + "' but found '" + text_[pos_] + "'", pos_);
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+'))
        lhs = Expr::binary(Op::add, lhs, parse_term());
      else if (accept('-'))
        lhs = Expr::binary(Op::sub, lhs, parse_term());
      else
        return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = Expr::binary(Op::mul, lhs, parse_unary());
      else if (accept('/'))
        lhs = Expr::binary(Op::div, lhs, parse_unary());
      else
        return lhs;
    }
  }

  Expr parse_unary() {
    if (accept('-')) {
      // A minus sign directly in front of a numeric literal makes a negative
      // constant; any other operand gets a negation node.
      skip_ws();
      const bool literal = pos_ < text_.size() && ((text_[pos_] >= '0' && text_[pos_] <= '9') ||
                                                   text_[pos_] == '.');
      Expr arg = literal ? parse_power() : parse_unary();
      if (literal && arg.op() == Op::constant) return Expr::constant(-arg.value());
      return Expr::unary(Op::neg, arg);
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return Expr::power(base, parse_exponent());
    return base;
  }

  int parse_exponent() {
    const bool paren = accept('(');
    const bool negative = accept('-');
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    if (start == pos_) throw ParseError("exponent must be an integer literal", start);
    long long n = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, n);
    if (ec != std::errc() || n > 1'000'000) throw ParseError("exponent out of range", start);
    if (paren) expect(')');
    return static_cast<int>(negative ? -n : n);
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return Expr::constant(v);
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);

    if (id == "sin" || id == "cos" || id == "exp") {
      expect('(');
      Expr arg = parse_expr();
      expect(')');
      const Op op = id == "sin" ? Op::sin : id == "cos" ? Op::cos : Op::exp;
      return Expr::unary(op, arg);
    }
    if (id == "q") return Expr::variable(Variable::base());
    if (id == "t") return Expr::variable(Variable::time());
    if (id == "lambda") return Expr::variable(Variable::lambda());
    if (id.size() >= 2 && id[0] == 'w') {
      bool digits = true;
      for (char d : id.substr(1)) digits = digits && d >= '0' && d <= '9';
      if (digits) {
        long long idx = 0;
        auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), idx);
        if (ec != std::errc() || idx < 1 || idx > fiber_dim_)
          throw ParseError("fiber variable " + std::string(id) + " out of range (K = " +
                               std::to_string(fiber_dim_) + ")",
                           start);
        return Expr::variable(Variable::fiber(static_cast<int>(idx)));
      }
    }
    throw ParseError("unknown identifier '" + std::string(id) + "'", start);
  }

  std::string_view text_;
  int fiber_dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `text` into an expression whose fiber variables are w1..w{fiber_dim}.
inline Expr parse(std::string_view text, int fiber_dim) {
  if (fiber_dim < 0) throw PreconditionError("fiber dimension must be >= 0");
  return detail::Parser(text, fiber_dim).parse();
}

}  // namespace viterbo
