#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/numfmt.hpp"
#include "decaykit/quadrature.hpp"

namespace decaykit {

class UnivariateFn;

namespace family {
/// c
struct Constant {
  double c;
};
/// c * (shift + t)^(-alpha)
struct PowerLaw {
  double c, alpha, shift;
};
/// c * exp(-lambda * t)
struct Exponential {
  double c, lambda;
};
/// c * t^p
struct Monomial {
  double c, p;
};
/// piece i is active on [breaks[i], breaks[i+1])
struct Piecewise {
  std::vector<double> breaks;
  std::vector<UnivariateFn> pieces;
};
/// linear interpolation between knots
struct Tabulated {
  std::vector<double> t;
  std::vector<double> v;
  bool extrapolate_constant;
  std::string source;
};
}  // namespace family

namespace detail {
struct FnRep;
}

/// Nonnegative scalar function of time (or of a nonnegative state variable).
///
/// Immutable value type; copies share the underlying representation.
class UnivariateFn {
 public:
  static UnivariateFn constant(double c);
  static UnivariateFn power_law(double c, double alpha, double shift = 1.0);
  static UnivariateFn exponential(double c, double lambda);
  static UnivariateFn monomial(double c, double p);
  static UnivariateFn piecewise(std::vector<std::pair<double, UnivariateFn>> pieces);
  static UnivariateFn tabulated(std::vector<double> t, std::vector<double> v,
                                bool extrapolate_constant = false, std::string source = {});

  UnivariateFn() : UnivariateFn(constant(0.0)) {}

  /// Throws DomainError for t < 0 or beyond the horizon of a tabulation.
  double operator()(double t) const;

  /// Last time the function is defined at; infinity for analytic families.
  double horizon() const;

  /// Textual descriptor in the `name(args)` schema accepted by parse_univariate.
  std::string describe() const;

  template <class Family>
  const Family* as() const;

 private:
  explicit UnivariateFn(std::shared_ptr<const detail::FnRep> rep) : rep_(std::move(rep)) {}
  std::shared_ptr<const detail::FnRep> rep_;
};

namespace detail {
struct FnRep {
  std::variant<family::Constant, family::PowerLaw, family::Exponential, family::Monomial,
               family::Piecewise, family::Tabulated>
      form;
};

inline void require_param(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}
}  // namespace detail

template <class Family>
const Family* UnivariateFn::as() const {
  return std::get_if<Family>(&rep_->form);
}

inline UnivariateFn UnivariateFn::constant(double c) {
  detail::require_param(std::isfinite(c) && c >= 0.0, "constant: value must be finite and >= 0");
  return UnivariateFn(std::make_shared<detail::FnRep>(detail::FnRep{family::Constant{c}}));
}

inline UnivariateFn UnivariateFn::power_law(double c, double alpha, double shift) {
  detail::require_param(std::isfinite(c) && c >= 0.0, "power_law: coefficient must be finite and >= 0");
  detail::require_param(std::isfinite(alpha), "power_law: exponent must be finite");
  detail::require_param(std::isfinite(shift) && shift >= 0.0, "power_law: shift must be >= 0");
  return UnivariateFn(
      std::make_shared<detail::FnRep>(detail::FnRep{family::PowerLaw{c, alpha, shift}}));
}

inline UnivariateFn UnivariateFn::exponential(double c, double lambda) {
  detail::require_param(std::isfinite(c) && c >= 0.0, "exponential: coefficient must be finite and >= 0");
  detail::require_param(std::isfinite(lambda), "exponential: rate must be finite");
  return UnivariateFn(
      std::make_shared<detail::FnRep>(detail::FnRep{family::Exponential{c, lambda}}));
}

inline UnivariateFn UnivariateFn::monomial(double c, double p) {
  detail::require_param(std::isfinite(c) && c >= 0.0, "monomial: coefficient must be finite and >= 0");
  detail::require_param(std::isfinite(p) && p >= 0.0, "monomial: power must be >= 0");
  return UnivariateFn(std::make_shared<detail::FnRep>(detail::FnRep{family::Monomial{c, p}}));
}

inline UnivariateFn UnivariateFn::piecewise(std::vector<std::pair<double, UnivariateFn>> pieces) {
  detail::require_param(!pieces.empty(), "piecewise: at least one piece required");
  family::Piecewise pw;
  for (auto& [b, fn] : pieces) {
    detail::require_param(std::isfinite(b), "piecewise: breakpoints must be finite");
    if (pw.breaks.empty())
      detail::require_param(b == 0.0, "piecewise: first breakpoint must be 0");
    else
      detail::require_param(b > pw.breaks.back(), "piecewise: breakpoints must be strictly increasing");
    pw.breaks.push_back(b);
    pw.pieces.push_back(std::move(fn));
  }
  return UnivariateFn(std::make_shared<detail::FnRep>(detail::FnRep{std::move(pw)}));
}

inline UnivariateFn UnivariateFn::tabulated(std::vector<double> t, std::vector<double> v,
                                            bool extrapolate_constant, std::string source) {
  detail::require_param(t.size() >= 2 && t.size() == v.size(),
                        "tabulated: need >= 2 knots and matching value count");
  detail::require_param(t.front() >= 0.0, "tabulated: grid must start at t >= 0");
  for (std::size_t i = 0; i < t.size(); ++i) {
    detail::require_param(std::isfinite(t[i]) && std::isfinite(v[i]), "tabulated: non-finite entry");
    detail::require_param(v[i] >= 0.0, "tabulated: negative value at t=" + format_double(t[i]));
    if (i > 0) detail::require_param(t[i] > t[i - 1], "tabulated: grid must be strictly increasing");
  }
  return UnivariateFn(std::make_shared<detail::FnRep>(detail::FnRep{
      family::Tabulated{std::move(t), std::move(v), extrapolate_constant, std::move(source)}}));
}

namespace detail {

inline double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const auto i = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

struct EvalVisitor {
  double t;
  double operator()(const family::Constant& f) const { return f.c; }
  double operator()(const family::PowerLaw& f) const { return f.c * std::pow(f.shift + t, -f.alpha); }
  double operator()(const family::Exponential& f) const { return f.c * std::exp(-f.lambda * t); }
  double operator()(const family::Monomial& f) const { return f.p == 0.0 ? f.c : f.c * std::pow(t, f.p); }
  double operator()(const family::Piecewise& f) const {
    auto it = std::upper_bound(f.breaks.begin(), f.breaks.end(), t);
    const auto i = static_cast<std::size_t>(it - f.breaks.begin()) - 1;
    return f.pieces[i](t);
  }
  double operator()(const family::Tabulated& f) const {
    if (t < f.t.front() || (t > f.t.back() && !f.extrapolate_constant))
      throw DomainError("tabulated function queried at t=" + format_double(t) +
                        " outside [" + format_double(f.t.front()) + ", " + format_double(f.t.back()) + "]");
    return interp_linear(f.t, f.v, t);
  }
};

}  // namespace detail

inline double UnivariateFn::operator()(double t) const {
  if (!(t >= 0.0)) throw DomainError("function evaluated at negative or NaN time " + format_double(t));
  return std::visit(detail::EvalVisitor{t}, rep_->form);
}

inline double UnivariateFn::horizon() const {
  if (const auto* tab = as<family::Tabulated>())
    return tab->extrapolate_constant ? std::numeric_limits<double>::infinity() : tab->t.back();
  if (const auto* pw = as<family::Piecewise>()) return pw->pieces.back().horizon();
  return std::numeric_limits<double>::infinity();
}

inline std::string UnivariateFn::describe() const {
  struct V {
    std::string operator()(const family::Constant& f) const { return "constant(" + format_double(f.c) + ")"; }
    std::string operator()(const family::PowerLaw& f) const {
      return "power_law(" + format_double(f.c) + ", " + format_double(f.alpha) + ", " + format_double(f.shift) + ")";
    }
    std::string operator()(const family::Exponential& f) const {
      return "exponential(" + format_double(f.c) + ", " + format_double(f.lambda) + ")";
    }
    std::string operator()(const family::Monomial& f) const {
      return "monomial(" + format_double(f.c) + ", " + format_double(f.p) + ")";
    }
    std::string operator()(const family::Piecewise& f) const {
      std::string s = "piecewise(";
      for (std::size_t i = 0; i < f.breaks.size(); ++i) {
        if (i) s += "; ";
        s += format_double(f.breaks[i]) + ": " + f.pieces[i].describe();
      }
      return s + ")";
    }
    std::string operator()(const family::Tabulated& f) const {
      std::string src = f.source.empty() ? "<inline:" + std::to_string(f.t.size()) + " knots>" : f.source;
      return "tabulated(\"" + src + "\"" + (f.extrapolate_constant ? ", extrapolate)" : ")");
    }
  };
  return std::visit(V{}, rep_->form);
}

/// Non-decreasing on [lo, hi]: consecutive samples never drop by more than `tol`.
template <class F>
bool monotone_check(const F& fn, double lo, double hi, std::size_t samples, double tol = 1e-12) {
  if (samples < 2) throw ConfigError("monotone_check needs at least 2 samples");
  if (!(lo <= hi)) throw ConfigError("monotone_check needs lo <= hi");
  double prev = fn(lo);
  for (std::size_t i = 1; i < samples; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double cur = fn(t);
    if (cur < prev - tol * (1.0 + std::abs(prev))) return false;
    prev = cur;
  }
  return true;
}

/// A modulus-type function: omega(0) = 0, omega > 0 away from 0, non-decreasing.
struct OmegaFn {
  UnivariateFn base;
  bool monotone_certified = false;
  double certified_up_to = 0.0;

  double operator()(double r) const { return base(r); }
};

/// Validates the omega invariants on a sample grid of [0, range] and certifies monotonicity.
inline OmegaFn make_omega(UnivariateFn base, double range = 100.0, std::size_t samples = 1025,
                          double tol = 1e-12) {
  if (std::abs(base(0.0)) > tol) throw ValidationError("omega(0) must vanish, got " + format_double(base(0.0)));
  for (std::size_t i = 1; i < samples; ++i) {
    const double r = range * static_cast<double>(i) / static_cast<double>(samples - 1);
    if (!(base(r) > 0.0)) throw ValidationError("omega must be positive at r=" + format_double(r));
  }
  OmegaFn out{std::move(base), false, 0.0};
  out.monotone_certified = monotone_check(out.base, 0.0, range, samples, tol);
  if (!out.monotone_certified) throw ValidationError("omega is not non-decreasing on the sample grid");
  out.certified_up_to = range;
  return out;
}

/// Lower estimate of inf_{x >= eps} f(x) taken over a uniform grid of [eps, horizon].
struct InfEstimate {
  double value;
  double argmin;
  double eps;
  double horizon;
  std::size_t samples;
};

template <class F>
InfEstimate inf_tail(const F& f, double eps, double horizon, std::size_t samples = 2001) {
  if (!(eps > 0.0) || !(horizon > eps)) throw ConfigError("inf_tail needs 0 < eps < horizon");
  if (samples < 2) throw ConfigError("inf_tail needs at least 2 samples");
  InfEstimate out{std::numeric_limits<double>::infinity(), eps, eps, horizon, samples};
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = eps + (horizon - eps) * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double v = f(x);
    if (v < out.value) {
      out.value = v;
      out.argmin = x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Descriptor text and CSV loading

/// Two-column CSV (time, value). Lines starting with '#' and a non-numeric header are skipped.
inline UnivariateFn load_tabulated_csv(const std::filesystem::path& path, bool extrapolate_constant = false) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tabulated function file " + path.string());
  std::vector<double> t, v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    try {
      const double a = parse_double(std::string_view(line).substr(0, comma));
      const double b = parse_double(std::string_view(line).substr(comma + 1));
      t.push_back(a);
      v.push_back(b);
    } catch (const ConfigError&) {
      if (t.empty()) continue;  // header row
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return UnivariateFn::tabulated(std::move(t), std::move(v), extrapolate_constant, path.string());
}

namespace detail {

class DescriptorParser {
 public:
  DescriptorParser(std::string_view text, std::filesystem::path base_dir)
      : text_(text), base_dir_(std::move(base_dir)) {}

  UnivariateFn parse() {
    UnivariateFn fn = function();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    return fn;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("function descriptor '" + std::string(text_) + "' at column " +
                      std::to_string(pos_ + 1) + ": " + msg);
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
  std::string identifier() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected a family name");
    return std::string(text_.substr(start, pos_ - start));
  }
  double number() {
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                   std::string_view("+-.eE").find(text_[pos_]) != std::string_view::npos))
      ++pos_;
    if (start == pos_) fail("expected a number");
    return parse_double(text_.substr(start, pos_ - start));
  }
  std::vector<double> numbers(std::size_t min_count, std::size_t max_count) {
    std::vector<double> out;
    if (!accept(')')) {
      do {
        out.push_back(number());
      } while (accept(','));
      expect(')');
    }
    if (out.size() < min_count || out.size() > max_count) fail("wrong number of parameters");
    return out;
  }
  std::string quoted() {
    skip_ws();
    if (!accept('"')) fail("expected a quoted path");
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
    if (pos_ == text_.size()) fail("unterminated string");
    std::string s(text_.substr(start, pos_ - start));
    ++pos_;
    return s;
  }

  UnivariateFn function() {
    const std::string name = identifier();
    expect('(');
    try {
      if (name == "constant") {
        auto p = numbers(1, 1);
        return UnivariateFn::constant(p[0]);
      }
      if (name == "power_law") {
        auto p = numbers(2, 3);
        return UnivariateFn::power_law(p[0], p[1], p.size() > 2 ? p[2] : 1.0);
      }
      if (name == "exponential") {
        auto p = numbers(2, 2);
        return UnivariateFn::exponential(p[0], p[1]);
      }
      if (name == "monomial") {
        auto p = numbers(2, 2);
        return UnivariateFn::monomial(p[0], p[1]);
      }
      if (name == "piecewise") {
        std::vector<std::pair<double, UnivariateFn>> pieces;
        do {
          const double b = number();
          expect(':');
          pieces.emplace_back(b, function());
        } while (accept(';'));
        expect(')');
        return UnivariateFn::piecewise(std::move(pieces));
      }
      if (name == "tabulated") {
        std::filesystem::path p = quoted();
        bool extrapolate = false;
        if (accept(',')) {
          if (identifier() != "extrapolate") fail("expected 'extrapolate'");
          extrapolate = true;
        }
        expect(')');
        if (p.is_relative()) p = base_dir_ / p;
        return load_tabulated_csv(p, extrapolate);
      }
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    fail("unknown function family '" + name + "'");
  }

  std::string_view text_;
  std::filesystem::path base_dir_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `constant(c)`, `power_law(c, alpha[, shift=1])`, `exponential(c, lambda)`,
/// `monomial(c, p)`, `piecewise(b0: fn; b1: fn; ...)` and `tabulated("file.csv"[, extrapolate])`.
/// Relative CSV paths resolve against `base_dir`.
inline UnivariateFn parse_univariate(std::string_view text, const std::filesystem::path& base_dir = {}) {
  return detail::DescriptorParser(text, base_dir).parse();
}

}  // namespace decaykit
