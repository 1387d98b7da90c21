#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/numfmt.hpp"

namespace decaykit {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated Richardson error estimate
  std::size_t evaluations = 0;
};

namespace detail {

template <class F>
double checked_eval(const F& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) throw NumericError("non-finite integrand value at x=" + format_double(x));
  return y;
}

struct SimpsonState {
  int min_depth;
  int max_depth;
  double error;
  std::size_t evaluations;
};

template <class F>
double simpson_step(const F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double eps, int depth, SimpsonState& st) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = checked_eval(f, lm);
  const double frm = checked_eval(f, rm);
  st.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= st.max_depth || (depth >= st.min_depth && std::abs(delta) <= 15.0 * eps)) {
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * eps, depth + 1, st) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * eps, depth + 1, st);
}

template <class F>
QuadResult simpson_pass(const F& f, double a, double b, double eps, int min_depth, int max_depth) {
  SimpsonState st{min_depth, max_depth, 0.0, 3};
  const double m = 0.5 * (a + b);
  const double fa = checked_eval(f, a);
  const double fm = checked_eval(f, m);
  const double fb = checked_eval(f, b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double v = simpson_step(f, a, fa, m, fm, b, fb, whole, eps, 0, st);
  return {v, st.error, st.evaluations};
}

}  // namespace detail

/// Adaptive Simpson quadrature with interval bisection.
///
/// The returned estimate satisfies `error <= tol * (1 + |value|)` unless the
/// recursion depth limit was hit, in which case `error` reports what was reached.
template <class F>
QuadResult integrate_adaptive(const F& f, double s, double t, double tol, int max_depth = 48) {
  if (!(tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  if (!(s <= t)) throw ConfigError("integration bounds must satisfy s <= t");
  if (s == t) return {};
  constexpr int kMinDepth = 3;
  const double coarse = detail::simpson_pass(f, s, t, std::numeric_limits<double>::infinity(), 2, 2).value;
  QuadResult r = detail::simpson_pass(f, s, t, tol * (1.0 + std::abs(coarse)), kMinDepth, max_depth);
  const double target = tol * (1.0 + std::abs(r.value));
  if (r.error > target) {
    QuadResult refined = detail::simpson_pass(f, s, t, 0.5 * target, kMinDepth, max_depth);
    refined.evaluations += r.evaluations;
    r = refined;
  }
  return r;
}

template <class F>
double integrate(const F& f, double s, double t, double tol) {
  return integrate_adaptive(f, s, t, tol).value;
}

/// Doubling-window policy for improper integrals over [0, inf).
struct TailPolicy {
  double first_window = 1.0;     // initial partial integral covers [0, first_window]
  double max_horizon = 0x1p50;   // windows stop here (or at the function's own horizon)
  double divergence_bound = 10.0;
  double decay_ratio = 0.9;      // consecutive window contributions must shrink by this factor
  int trend_windows = 3;
  double quad_tol = 1e-12;
};

struct TailVerdict {
  enum class Kind { converged, diverged, inconclusive };
  Kind kind = Kind::inconclusive;
  double estimate = 0.0;  // partial integral plus geometric tail extrapolation when converged
  double partial = 0.0;   // integral over [0, horizon]
  double horizon = 0.0;
  std::vector<double> window_ends;
  std::vector<double> contributions;

  bool converged() const { return kind == Kind::converged; }
  bool diverged() const { return kind == Kind::diverged; }
};

inline const char* to_string(TailVerdict::Kind k) {
  switch (k) {
    case TailVerdict::Kind::converged: return "converged";
    case TailVerdict::Kind::diverged: return "diverged";
    case TailVerdict::Kind::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

/// Cauchy-style tail test for a nonnegative integrand.
///
/// Converged: the latest full window contributes less than `tol` and the last
/// `trend_windows` contributions shrink geometrically. Diverged: the partial
/// integral exceeds the divergence bound while window contributions are
/// non-decreasing. Anything else runs until the horizon and is inconclusive.
template <class F>
TailVerdict tail_verdict(const F& f, double tol, const TailPolicy& policy = {},
                         double fn_horizon = std::numeric_limits<double>::infinity()) {
  if (!(tol > 0.0)) throw ConfigError("tail tolerance must be positive");
  if (!(policy.first_window > 0.0) || policy.trend_windows < 1)
    throw ConfigError("invalid tail window policy");
  TailVerdict out;
  const double horizon = std::min(policy.max_horizon, fn_horizon);
  double lo = std::min(policy.first_window, horizon);
  out.partial = integrate(f, 0.0, lo, policy.quad_tol);
  out.horizon = lo;
  const auto n_trend = static_cast<std::size_t>(policy.trend_windows);

  while (lo < horizon) {
    const double hi = std::min(2.0 * lo, horizon);
    const double c = integrate(f, lo, hi, policy.quad_tol);
    const bool full = hi == 2.0 * lo;
    out.partial += c;
    out.horizon = hi;
    out.window_ends.push_back(hi);
    out.contributions.push_back(c);
    lo = hi;
    const auto& cs = out.contributions;
    if (!full || cs.size() < n_trend + 1) continue;

    bool shrinking = true;
    bool growing = true;
    for (std::size_t i = cs.size() - n_trend; i < cs.size(); ++i) {
      if (!(cs[i] == 0.0 || cs[i] <= policy.decay_ratio * cs[i - 1])) shrinking = false;
      if (cs[i] < cs[i - 1] * (1.0 - 1e-12)) growing = false;
    }
    if (shrinking && c < tol) {
      out.kind = TailVerdict::Kind::converged;
      const double prev = cs[cs.size() - 2];
      const double r = prev > 0.0 ? c / prev : 0.0;
      out.estimate = out.partial + (r < 1.0 ? c * r / (1.0 - r) : 0.0);
      return out;
    }
    if (growing && out.partial > policy.divergence_bound) {
      out.kind = TailVerdict::Kind::diverged;
      out.estimate = out.partial;
      return out;
    }
  }
  out.kind = TailVerdict::Kind::inconclusive;
  out.estimate = out.partial;
  return out;
}

/// Uniform grid of `count` points on [a, b].
inline std::vector<double> linspace(double a, double b, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  out.back() = b;
  return out;
}

/// Log-spaced grid of `count` points on [a, b], a > 0.
inline std::vector<double> logspace(double a, double b, std::size_t count) {
  if (!(a > 0.0) || !(b >= a)) throw ConfigError("logspace needs 0 < a <= b");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = a;
    return out;
  }
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

}  // namespace decaykit
