#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/numfmt.hpp"

namespace decaykit {

/// Arithmetic expression in time `x` and state `y`.
///
/// Grammar: numbers, `x`, `y`, `+ - * / ^`, parentheses, `min(a, b)`, `max(a, b)`,
/// `exp(a)` and `piecewise_y(threshold, below, above)` which selects `below` when
/// y <= threshold.
class Expr {
 public:
  enum class Op { num, var_x, var_y, neg, add, sub, mul, div, pow, min, max, exp, piecewise_y };

  static Expr parse(std::string_view text);

  double operator()(double x, double y) const { return eval(*node_, x, y); }

  /// Largest jump |below - above| over all piecewise_y nodes, evaluated at time x.
  double max_jump(double x) const { return jump(*node_, x); }

  const std::string& text() const { return text_; }

 private:
  struct Node {
    Op op;
    double value = 0.0;
    std::vector<std::shared_ptr<const Node>> args;
  };
  using NodePtr = std::shared_ptr<const Node>;
  class Parser;

  static double eval(const Node& n, double x, double y) {
    switch (n.op) {
      case Op::num: return n.value;
      case Op::var_x: return x;
      case Op::var_y: return y;
      case Op::neg: return -eval(*n.args[0], x, y);
      case Op::add: return eval(*n.args[0], x, y) + eval(*n.args[1], x, y);
      case Op::sub: return eval(*n.args[0], x, y) - eval(*n.args[1], x, y);
      case Op::mul: return eval(*n.args[0], x, y) * eval(*n.args[1], x, y);
      case Op::div: return eval(*n.args[0], x, y) / eval(*n.args[1], x, y);
      case Op::pow: return std::pow(eval(*n.args[0], x, y), eval(*n.args[1], x, y));
      case Op::min: return std::min(eval(*n.args[0], x, y), eval(*n.args[1], x, y));
      case Op::max: return std::max(eval(*n.args[0], x, y), eval(*n.args[1], x, y));
      case Op::exp: return std::exp(eval(*n.args[0], x, y));
      case Op::piecewise_y:
        return y <= eval(*n.args[0], x, y) ? eval(*n.args[1], x, y) : eval(*n.args[2], x, y);
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  static double jump(const Node& n, double x) {
    double worst = 0.0;
    for (const auto& a : n.args) worst = std::max(worst, jump(*a, x));
    if (n.op == Op::piecewise_y) {
      const double thr = eval(*n.args[0], x, 0.0);
      worst = std::max(worst, std::abs(eval(*n.args[1], x, thr) - eval(*n.args[2], x, thr)));
    }
    return worst;
  }

  NodePtr node_;
  std::string text_;
};

class Expr::Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr n = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) + ": " + msg);
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
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
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  static NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0.0) {
    return std::make_shared<const Node>(Node{op, value, std::move(args)});
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::add, {lhs, term()});
      else if (accept('-')) lhs = make(Op::sub, {lhs, term()});
      else return lhs;
    }
  }
  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::mul, {lhs, unary()});
      else if (accept('/')) lhs = make(Op::div, {lhs, unary()});
      else return lhs;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Op::neg, {unary()});
    NodePtr base = primary();
    if (accept('^')) return make(Op::pow, {base, unary()});
    return base;
  }
  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr n = expression();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const auto start = pos_;
      while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
        ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
      return make(Op::num, {}, parse_double(text_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const auto start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string_view name = text_.substr(start, pos_ - start);
      if (name == "x") return make(Op::var_x);
      if (name == "y") return make(Op::var_y);
      Op op;
      std::size_t arity;
      if (name == "min") op = Op::min, arity = 2;
      else if (name == "max") op = Op::max, arity = 2;
      else if (name == "exp") op = Op::exp, arity = 1;
      else if (name == "piecewise_y") op = Op::piecewise_y, arity = 3;
      else fail("unknown identifier '" + std::string(name) + "'");
      expect('(');
      std::vector<NodePtr> args;
      do {
        args.push_back(expression());
      } while (accept(','));
      expect(')');
      if (args.size() != arity) fail("wrong number of arguments to " + std::string(name));
      return make(op, std::move(args));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline Expr Expr::parse(std::string_view text) {
  Expr e;
  e.node_ = Parser(text).parse();
  e.text_ = std::string(text);
  return e;
}

namespace form {
/// g(x) * phi(y) + h(x)
struct Separable {
  UnivariateFn g, phi, h;
  bool phi_monotone = false;
};
struct Analytic {
  Expr expr;
};
/// bilinear interpolation on a tensor grid
struct GridSampled {
  std::vector<double> xs, ys;
  std::vector<double> values;  // row-major, index [i * ys.size() + j] for (xs[i], ys[j])
};
}  // namespace form

/// Sampled domain used to validate nonnegativity and continuity at construction.
struct SampleDomain {
  double x_max = 100.0;
  double y_max = 10.0;
  std::size_t x_samples = 41;
  std::size_t y_samples = 41;
};

/// Nonnegative continuous function f(x, y) of time x and state y.
class BivariateFn {
 public:
  using Form = std::variant<form::Separable, form::Analytic, form::GridSampled>;

  static BivariateFn separable(UnivariateFn g, UnivariateFn phi, UnivariateFn h, SampleDomain dom = {}) {
    form::Separable s{std::move(g), std::move(phi), std::move(h), false};
    s.phi_monotone = monotone_check(s.phi, 0.0, dom.y_max, 257);
    return BivariateFn(Form{std::move(s)}, dom);
  }

  static BivariateFn analytic(std::string_view text, SampleDomain dom = {}) {
    return BivariateFn(Form{form::Analytic{Expr::parse(text)}}, dom);
  }

  static BivariateFn grid_sampled(std::vector<double> xs, std::vector<double> ys, std::vector<double> values) {
    if (xs.size() < 2 || ys.size() < 2 || values.size() != xs.size() * ys.size())
      throw ValidationError("grid_sampled: need >= 2 points per axis and a full value table");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1])) throw ValidationError("grid_sampled: x grid must be strictly increasing");
    for (std::size_t j = 1; j < ys.size(); ++j)
      if (!(ys[j] > ys[j - 1])) throw ValidationError("grid_sampled: y grid must be strictly increasing");
    SampleDomain dom{xs.back(), ys.back(), xs.size(), ys.size()};
    return BivariateFn(Form{form::GridSampled{std::move(xs), std::move(ys), std::move(values)}}, dom);
  }

  double operator()(double x, double y) const {
    if (!(x >= 0.0) || !(y >= 0.0)) throw DomainError("bivariate function needs x >= 0 and y >= 0");
    if (const auto* s = std::get_if<form::Separable>(&form_)) return s->g(x) * s->phi(y) + s->h(x);
    if (const auto* a = std::get_if<form::Analytic>(&form_)) return a->expr(x, y);
    const auto& g = std::get<form::GridSampled>(form_);
    return grid_eval(g, x, y);
  }

  const Form& form() const { return form_; }
  const SampleDomain& domain() const { return domain_; }

  /// True when sup over y in [0, v] is attained at y = v (separable with certified non-decreasing phi).
  bool sup_at_upper_end(double v) const {
    const auto* s = std::get_if<form::Separable>(&form_);
    return s != nullptr && s->phi_monotone && v <= domain_.y_max;
  }

  std::string describe() const {
    if (const auto* s = std::get_if<form::Separable>(&form_))
      return "separable(" + s->g.describe() + ", " + s->phi.describe() + ", " + s->h.describe() + ")";
    if (const auto* a = std::get_if<form::Analytic>(&form_)) return a->expr.text();
    return "grid_sampled(" + std::to_string(std::get<form::GridSampled>(form_).xs.size()) + "x" +
           std::to_string(std::get<form::GridSampled>(form_).ys.size()) + ")";
  }

 private:
  BivariateFn(Form f, SampleDomain dom) : form_(std::move(f)), domain_(dom) { validate(); }

  static double grid_eval(const form::GridSampled& g, double x, double y) {
    if (x < g.xs.front() || x > g.xs.back() || y < g.ys.front() || y > g.ys.back())
      throw DomainError("grid_sampled function queried outside its grid");
    auto cell = [](const std::vector<double>& axis, double q) {
      auto it = std::upper_bound(axis.begin(), axis.end(), q);
      std::size_t i = it == axis.end() ? axis.size() - 2 : static_cast<std::size_t>(it - axis.begin()) - 1;
      return std::min(i, axis.size() - 2);
    };
    const std::size_t i = cell(g.xs, x), j = cell(g.ys, y);
    const double wx = (x - g.xs[i]) / (g.xs[i + 1] - g.xs[i]);
    const double wy = (y - g.ys[j]) / (g.ys[j + 1] - g.ys[j]);
    const std::size_t ny = g.ys.size();
    auto v = [&](std::size_t a, std::size_t b) { return g.values[a * ny + b]; };
    return (1 - wx) * ((1 - wy) * v(i, j) + wy * v(i, j + 1)) + wx * ((1 - wy) * v(i + 1, j) + wy * v(i + 1, j + 1));
  }

  void validate() const {
    const auto xs = linspace(0.0, domain_.x_max, domain_.x_samples);
    const auto ys = linspace(0.0, domain_.y_max, domain_.y_samples);
    for (double x : xs) {
      for (double y : ys) {
        const double v = (*this)(x, y);
        if (!std::isfinite(v) || v < 0.0)
          throw ValidationError("bivariate function negative or non-finite at (" + format_double(x) + ", " +
                                format_double(y) + ")");
      }
      if (const auto* a = std::get_if<form::Analytic>(&form_)) {
        const double j = a->expr.max_jump(x);
        if (j > 1e-9) throw ValidationError("discontinuity across a piecewise_y boundary at x=" + format_double(x));
      }
    }
  }

  Form form_;
  SampleDomain domain_;
};

/// max over zeta in [0, v] of f(x, zeta).
///
/// Uses a uniform zeta grid of `resolution` points polished by golden section around
/// the argmax, or the upper endpoint directly when the maximum is known to sit there.
inline double sup_slice(const BivariateFn& f, double x, double v, std::size_t resolution = 33) {
  if (resolution == 0) throw ConfigError("sup_slice: zeta grid resolution must be positive");
  if (!(x >= 0.0) || !(v >= 0.0)) throw ConfigError("sup_slice needs x >= 0 and v >= 0");
  if (v == 0.0 || resolution == 1) return std::max(f(x, 0.0), f(x, v));
  if (f.sup_at_upper_end(v)) return f(x, v);
  const std::size_t n = std::max<std::size_t>(resolution, 2);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = v * static_cast<double>(i) / static_cast<double>(n - 1);
    const double val = f(x, z);
    if (val > best) best = val, arg = i;
  }
  const double step = v / static_cast<double>(n - 1);
  const double lo = std::max(0.0, step * (static_cast<double>(arg) - 1.0));
  const double hi = std::min(v, step * (static_cast<double>(arg) + 1.0));
  // golden-section polish of the bracket around the grid argmax
  constexpr double r = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(x, c), fd = f(x, d);
  for (int it = 0; it < 80 && b - a > 1e-9 * (hi - lo); ++it) {
    if (fc >= fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a);
      fc = f(x, c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a);
      fd = f(x, d);
    }
  }
  return std::max({best, fc, fd});
}

}  // namespace decaykit
