#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decaykit/bivariate.hpp"
#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/numfmt.hpp"
#include "decaykit/quadrature.hpp"

namespace decaykit {

enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline Status parse_status(const std::string& s) {
  if (s == "pass") return Status::pass;
  if (s == "fail") return Status::fail;
  if (s == "inconclusive") return Status::inconclusive;
  throw ConfigError("unknown status '" + s + "'");
}

struct Witness {
  std::map<std::string, double> values;
  std::vector<std::string> table_columns;
  std::vector<std::vector<double>> table;
  std::vector<std::string> notes;
};

struct ConditionRecord {
  std::string name;
  Status status = Status::inconclusive;
  Witness witness;
  double horizon = 0.0;  // finite horizon the evidence was gathered on
};

/// Per-condition verdicts for one theorem (or assumption) applied to one scenario.
struct HypothesisReport {
  std::string theorem;
  std::vector<ConditionRecord> conditions;
  std::vector<std::string> notes;

  void add(ConditionRecord rec) {
    if (rec.witness.values.empty() && rec.witness.table.empty())
      throw ValidationError("condition record '" + rec.name + "' carries no numeric witness");
    conditions.push_back(std::move(rec));
  }
  void add(std::vector<ConditionRecord> recs) {
    for (auto& r : recs) add(std::move(r));
  }

  /// pass only if every condition passes; any fail wins over inconclusive.
  Status overall() const {
    bool inconclusive = conditions.empty();
    for (const auto& c : conditions) {
      if (c.status == Status::fail) return Status::fail;
      if (c.status == Status::inconclusive) inconclusive = true;
    }
    return inconclusive ? Status::inconclusive : Status::pass;
  }

  double horizon() const {
    double h = 0.0;
    for (const auto& c : conditions) h = std::max(h, c.horizon);
    return h;
  }

  const ConditionRecord* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Finite-horizon parameters shared by all checkers.
struct CheckConfig {
  double horizon = 1e6;          // T: sampled "t -> infinity" checks stop here
  double s_min = 10.0;           // realizes "t > s >> 1"
  std::vector<double> deltas{0.1, 0.5, 1.0};
  int subhorizons = 5;           // uc certificate: T/2^(k-1), ..., T/2, T
  int pair_s = 16;
  int pair_gap = 16;
  int window_samples = 64;
  int trend_windows = 3;
  double stability_tol = 1e-3;   // relative change still counted as stable
  double growth_tol = 0.05;      // relative growth per window counted as growth
  double ratio_zero_tol = 1e-3;  // "ratio tends to 0" threshold
  double tail_tol = 1e-6;
  TailPolicy tail{};
  std::size_t zeta_resolution = 33;
  double state_horizon = 100.0;  // range of the state variable for f(g) checks
  std::vector<double> inf_eps{0.01, 0.1, 1.0};
  double quad_tol = 1e-10;

  void validate() const {
    if (!(horizon > s_min) || !(s_min > 0.0)) throw ConfigError("check config needs T > s_min > 0");
    if (!(stability_tol > 0.0) || !(growth_tol > 0.0) || !(ratio_zero_tol > 0.0) || !(tail_tol > 0.0) ||
        !(quad_tol > 0.0))
      throw ConfigError("check config tolerances must be positive");
    if (subhorizons < 2 || pair_s < 1 || pair_gap < 1 || window_samples < 2 || trend_windows < 1)
      throw ConfigError("check config sample counts too small");
    if (zeta_resolution == 0) throw ConfigError("zeta resolution must be positive");
  }
};

namespace detail {

struct Window {
  double lo, hi, max, min;
};

/// Doubling windows [s_min 2^k, s_min 2^(k+1)] clipped at T with extrema of fn over log-spaced samples.
template <class F>
std::vector<Window> doubling_windows(const F& fn, double s_min, double T, int samples) {
  std::vector<Window> out;
  for (double lo = s_min; lo < T; lo *= 2.0) {
    const double hi = std::min(2.0 * lo, T);
    Window w{lo, hi, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (double t : logspace(lo, hi, static_cast<std::size_t>(samples))) {
      const double v = fn(t);
      w.max = std::max(w.max, v);
      w.min = std::min(w.min, v);
    }
    out.push_back(w);
  }
  return out;
}

inline bool last_steps_growing(const std::vector<double>& ms, int n, double growth_tol) {
  if (ms.size() < static_cast<std::size_t>(n) + 1) return false;
  for (std::size_t i = ms.size() - static_cast<std::size_t>(n); i < ms.size(); ++i)
    if (!(ms[i] > ms[i - 1] * (1.0 + growth_tol) && ms[i] > 0.0)) return false;
  return true;
}

inline bool last_step_stable(const std::vector<double>& ms, double stab_tol) {
  if (ms.size() < 2) return false;
  const double last = ms.back(), prev = ms[ms.size() - 2];
  return std::isfinite(last) && last <= prev * (1.0 + stab_tol) + std::numeric_limits<double>::min();
}

inline Status tail_status(const TailVerdict& v, bool want_convergence) {
  if (v.kind == TailVerdict::Kind::inconclusive) return Status::inconclusive;
  return v.converged() == want_convergence ? Status::pass : Status::fail;
}

inline Witness tail_witness(const TailVerdict& v) {
  Witness w;
  w.values["partial_integral"] = v.partial;
  w.values["estimate"] = v.estimate;
  w.values["tail_horizon"] = v.horizon;
  w.values["last_window_contribution"] = v.contributions.empty() ? 0.0 : v.contributions.back();
  w.notes.push_back(std::string("tail verdict: ") + to_string(v.kind));
  return w;
}

// n/d for a nonnegative numerator; an underflowed denominator gives 0 over 0 = 0, else +inf.
inline double ratio_value(double n, double d, const std::string& what) {
  if (d > 0.0) return n / d;
  if (d < 0.0 || std::isnan(d)) throw ConfigError(what + ": denominator must be positive");
  return n == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Condition record for an improper integral over [0, inf).
template <class F>
ConditionRecord tail_condition(std::string name, const F& fn, bool want_convergence, const CheckConfig& cfg,
                               double fn_horizon = std::numeric_limits<double>::infinity()) {
  try {
    const TailVerdict v = tail_verdict(fn, cfg.tail_tol, cfg.tail, fn_horizon);
    return {std::move(name), detail::tail_status(v, want_convergence), detail::tail_witness(v), v.horizon};
  } catch (const NumericError& e) {
    // a nonnegative integrand that overflows: the integral diverges
    ConditionRecord rec{std::move(name), want_convergence ? Status::fail : Status::pass, {}, cfg.tail.max_horizon};
    rec.witness.values["partial_integral"] = std::numeric_limits<double>::infinity();
    rec.witness.notes.push_back(std::string("integrand not finite: ") + e.what());
    return rec;
  }
}

// ---------------------------------------------------------------------------
// Majorant F(t, v) and its uniform-continuity certificate

/// Uniform grid 0, step, 2 step, ..., T (T always included).
inline std::vector<double> uniform_grid(double T, double step) {
  if (!(T > 0.0) || !(step > 0.0)) throw ConfigError("uniform grid needs T > 0 and step > 0");
  const auto n = static_cast<std::size_t>(std::ceil(T / step - 1e-9));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = std::min(T, step * static_cast<double>(i));
  g.back() = T;
  return g;
}

/// Tabulated F(t, v) = integral over [0, t] of max_{0 <= zeta <= v} f(x, zeta) dx.
inline UnivariateFn build_F(const BivariateFn& f, double v, const std::vector<double>& t_grid,
                            std::size_t zeta_resolution = 33, double quad_tol = 1e-10) {
  if (!(v >= 0.0)) throw ConfigError("build_F needs v >= 0");
  if (t_grid.size() < 2 || t_grid.front() != 0.0) throw ConfigError("build_F needs a grid starting at 0");
  auto slice = [&](double x) { return sup_slice(f, x, v, zeta_resolution); };
  std::vector<double> F(t_grid.size(), 0.0);
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw ConfigError("build_F grid must be strictly increasing");
    F[i] = F[i - 1] + std::max(0.0, integrate(slice, t_grid[i - 1], t_grid[i], quad_tol));
  }
  return UnivariateFn::tabulated(t_grid, std::move(F), false, "F(t," + format_double(v) + ")");
}

/// Finite-horizon uniform-continuity certificate for F.
///
/// Computes m(delta, T_j) = max_{t <= T_j - delta} F(t + delta) - F(t) on doubling
/// sub-horizons T_j ending at T. Fails when m grows with T (relative least-squares
/// slope above growth_tol), passes when the last two sub-horizons agree within
/// stability_tol for every delta.
inline ConditionRecord uc_certificate(const UnivariateFn& F, const CheckConfig& cfg) {
  cfg.validate();
  const double T = std::min(cfg.horizon, F.horizon());
  if (!std::isfinite(T)) throw ConfigError("uc_certificate needs a finite horizon");
  const double T0 = T / std::pow(2.0, cfg.subhorizons - 1);
  for (double d : cfg.deltas)
    if (!(d > 0.0) || d >= T0) throw ConfigError("uc_certificate: delta must satisfy 0 < delta < smallest sub-horizon");

  std::vector<double> knots;
  if (const auto* tab = F.as<family::Tabulated>()) knots = tab->t;
  else knots = linspace(0.0, T, 4097);

  ConditionRecord rec;
  rec.name = "F_uniformly_continuous";
  rec.horizon = T;
  rec.witness.table_columns = {"delta", "subhorizon", "modulus"};
  bool all_stable = true, any_growing = false;

  for (double d : cfg.deltas) {
    std::vector<double> Ts, ms;
    for (int j = 0; j < cfg.subhorizons; ++j) {
      const double Tj = T0 * std::pow(2.0, j);
      double m = 0.0;
      auto probe = [&](double t) {
        if (t >= 0.0 && t + d <= Tj) m = std::max(m, F(t + d) - F(t));
      };
      for (double k : knots) {
        if (k > Tj) break;
        probe(k);
        probe(k - d);
      }
      probe(Tj - d);
      Ts.push_back(Tj);
      ms.push_back(m);
      rec.witness.table.push_back({d, Tj, m});
    }
    double tm = 0, mm = 0;
    for (std::size_t i = 0; i < Ts.size(); ++i) tm += Ts[i], mm += ms[i];
    tm /= static_cast<double>(Ts.size());
    mm /= static_cast<double>(Ts.size());
    double num = 0, den = 0;
    for (std::size_t i = 0; i < Ts.size(); ++i) num += (Ts[i] - tm) * (ms[i] - mm), den += (Ts[i] - tm) * (Ts[i] - tm);
    const double slope = num / den;
    const double scale = std::max(ms.back(), std::numeric_limits<double>::min());
    const double rel_slope = slope * T / scale;
    const double last_change = std::abs(ms.back() - ms[ms.size() - 2]);
    const bool stable = last_change <= cfg.stability_tol * scale + 1e-12;
    const bool growing = rel_slope > cfg.growth_tol && !stable;
    all_stable = all_stable && stable;
    any_growing = any_growing || growing;
    const std::string key = "delta=" + format_double(d);
    rec.witness.values["modulus[" + key + "]"] = ms.back();
    rec.witness.values["relative_slope[" + key + "]"] = rel_slope;
  }
  rec.status = any_growing ? Status::fail : (all_stable ? Status::pass : Status::inconclusive);
  rec.witness.notes.push_back("finite-horizon certificate on [0, " + format_double(T) + "]");
  return rec;
}

// ---------------------------------------------------------------------------
// Regularity of phi: t - C/phi(t) -> inf and bounded max/min ratio on [t - C/phi(t), t]

template <class F>
double max_min_ratio(const F& phi, double lo, double hi, std::size_t samples = 65) {
  double mx = 0.0, mn = std::numeric_limits<double>::infinity();
  for (double x : linspace(lo, hi, samples)) {
    const double v = phi(x);
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  return mn > 0.0 ? mx / mn : std::numeric_limits<double>::infinity();
}

template <class F>
std::vector<ConditionRecord> regularity_profile(const F& phi, double C, const CheckConfig& cfg) {
  cfg.validate();
  if (!(C > 0.0)) throw ConfigError("regularity_profile needs C > 0");
  auto rho = [&](double t) {
    const double p = phi(t);
    if (!(p > 0.0)) throw ConfigError("regularity_profile needs phi > 0, got phi(" + format_double(t) + ") = " + format_double(p));
    return t - C / p;
  };

  ConditionRecord limit;
  limit.name = "t_minus_C_over_phi_diverges";
  limit.horizon = cfg.horizon;
  limit.witness.table_columns = {"window_end", "max_rho"};
  const auto windows = detail::doubling_windows(rho, cfg.s_min, cfg.horizon, cfg.window_samples);
  std::vector<double> maxima;
  for (const auto& w : windows) {
    maxima.push_back(w.max);
    limit.witness.table.push_back({w.hi, w.max});
  }
  bool last_window_monotone = true;
  {
    const auto& w = windows.back();
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : logspace(w.lo, w.hi, static_cast<std::size_t>(cfg.window_samples))) {
      const double r = rho(t);
      if (r < prev) last_window_monotone = false;
      prev = r;
    }
  }
  const double prior_max = maxima.size() > 1 ? *std::max_element(maxima.begin(), maxima.end() - 1)
                                             : -std::numeric_limits<double>::infinity();
  bool increasing = maxima.size() > static_cast<std::size_t>(cfg.trend_windows);
  for (std::size_t i = maxima.size() - std::min<std::size_t>(maxima.size() - 1, cfg.trend_windows); i < maxima.size(); ++i)
    if (!(maxima[i] > maxima[i - 1])) increasing = false;
  if (increasing && last_window_monotone && maxima.back() > prior_max) limit.status = Status::pass;
  else if (maxima.back() <= prior_max) limit.status = Status::fail;
  else limit.status = Status::inconclusive;
  limit.witness.values["rho_at_horizon"] = rho(cfg.horizon);
  limit.witness.values["max_rho_last_window"] = maxima.back();
  limit.witness.values["C"] = C;

  ConditionRecord ratio;
  ratio.name = "phi_ratio_bounded";
  ratio.horizon = cfg.horizon;
  ratio.witness.table_columns = {"window_end", "max_ratio"};
  std::vector<double> ratio_maxima;
  std::size_t skipped = 0;
  double overall = 0.0;
  for (double lo = cfg.s_min; lo < cfg.horizon; lo *= 2.0) {
    const double hi = std::min(2.0 * lo, cfg.horizon);
    double wmax = -1.0;
    for (double t : logspace(lo, hi, static_cast<std::size_t>(cfg.window_samples))) {
      const double left = t - C / phi(t);
      if (left < 0.0) {
        ++skipped;
        continue;
      }
      wmax = std::max(wmax, max_min_ratio(phi, left, t));
    }
    if (wmax >= 0.0) {
      ratio_maxima.push_back(wmax);
      ratio.witness.table.push_back({hi, wmax});
      overall = std::max(overall, wmax);
    }
  }
  if (skipped > 0)
    ratio.witness.notes.push_back(std::to_string(skipped) + " samples skipped: interval [t - C/phi(t), t] leaves [0, inf)");
  ratio.witness.values["skipped_samples"] = static_cast<double>(skipped);
  if (ratio_maxima.size() < 2) {
    ratio.status = Status::inconclusive;
    ratio.witness.values["M_hat"] = ratio_maxima.empty() ? std::numeric_limits<double>::quiet_NaN() : ratio_maxima.back();
  } else {
    ratio.witness.values["M_hat"] = ratio_maxima.back();
    ratio.witness.values["max_ratio_sampled"] = overall;
    if (detail::last_step_stable(ratio_maxima, cfg.growth_tol)) ratio.status = Status::pass;
    else if (detail::last_steps_growing(ratio_maxima, cfg.trend_windows, cfg.growth_tol)) ratio.status = Status::fail;
    else ratio.status = Status::inconclusive;
  }
  return {limit, ratio};
}

// ---------------------------------------------------------------------------
// Growth bounds on the state-sliced supremum of f

struct GrowthMode {
  enum class Kind { integral_theta, pointwise, power_law };
  Kind kind = Kind::integral_theta;
  double alpha = 1.0;  // power_law mode only

  static GrowthMode integral_theta() { return {Kind::integral_theta, 1.0}; }
  static GrowthMode pointwise() { return {Kind::pointwise, 1.0}; }
  static GrowthMode power_law(double alpha) { return {Kind::power_law, alpha}; }
};

/// Fits the constant in one of the growth bounds over log-spaced (s, t) pairs:
/// integral_theta -> theta_hat, pointwise -> C_tilde_hat, power_law -> kappa_hat.
template <class Phi>
ConditionRecord growth_bound_check(const BivariateFn& f, double a, const Phi& phi, GrowthMode mode,
                                   const CheckConfig& cfg) {
  cfg.validate();
  if (!(a > 0.0)) throw ConfigError("growth_bound_check needs a > 0");
  const double T = cfg.horizon;
  std::vector<std::pair<double, double>> pairs;
  if (T / 2 >= cfg.s_min) {
    const auto ss = logspace(cfg.s_min, T / 2, static_cast<std::size_t>(cfg.pair_s));
    const auto gaps = logspace(std::min(0.1, T / 4), T / 2, static_cast<std::size_t>(cfg.pair_gap));
    for (double s : ss)
      for (double g : gaps)
        if (s + g <= T) pairs.emplace_back(s, s + g);
  }
  if (pairs.empty()) throw ConfigError("growth_bound_check: empty pair sample (check s_min and horizon)");

  auto slice = [&](double x) { return sup_slice(f, x, a, cfg.zeta_resolution); };
  std::map<double, double> cumulative;  // x -> integral of slice from s_min to x
  if (mode.kind != GrowthMode::Kind::pointwise) {
    std::vector<double> pts;
    for (auto [s, t] : pairs) pts.push_back(s), pts.push_back(t);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double acc = 0.0;
    cumulative[pts[0]] = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      acc += integrate(slice, pts[i - 1], pts[i], cfg.quad_tol);
      cumulative[pts[i]] = acc;
    }
  }

  ConditionRecord rec;
  rec.horizon = T;
  const char* fitted = "theta_hat";
  switch (mode.kind) {
    case GrowthMode::Kind::integral_theta: rec.name = "growth_bound_integral_theta"; break;
    case GrowthMode::Kind::pointwise: rec.name = "growth_bound_pointwise"; fitted = "C_tilde_hat"; break;
    case GrowthMode::Kind::power_law: rec.name = "growth_bound_power_law"; fitted = "kappa_hat"; break;
  }

  std::map<int, double> window_max;  // doubling window index of s -> max ratio
  double sup_ratio = 0.0;
  for (auto [s, t] : pairs) {
    double ratio;
    if (mode.kind == GrowthMode::Kind::pointwise) {
      ratio = slice(t) / phi(t);
    } else {
      const double lhs = cumulative.at(t) - cumulative.at(s);
      double rhs;
      if (mode.kind == GrowthMode::Kind::integral_theta) {
        double mx = 0.0;
        for (double x : linspace(s, t, 33)) mx = std::max(mx, phi(x));
        rhs = (t - s) * a * mx;
      } else {
        rhs = a * (t - s) / std::pow(s, mode.alpha);
      }
      ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    }
    const int k = static_cast<int>(std::floor(std::log2(s / cfg.s_min) + 1e-12));
    window_max[k] = std::max(window_max.count(k) ? window_max[k] : 0.0, ratio);
    sup_ratio = std::max(sup_ratio, ratio);
  }
  std::vector<double> maxima;
  rec.witness.table_columns = {"window_index", "max_ratio"};
  for (auto [k, m] : window_max) {
    maxima.push_back(m);
    rec.witness.table.push_back({static_cast<double>(k), m});
  }
  rec.witness.values[fitted] = sup_ratio;
  rec.witness.values["pairs"] = static_cast<double>(pairs.size());
  rec.witness.values["a"] = a;
  if (!std::isfinite(sup_ratio) || detail::last_steps_growing(maxima, cfg.trend_windows, cfg.growth_tol))
    rec.status = Status::fail;
  else if (maxima.size() == 1 || detail::last_step_stable(maxima, cfg.growth_tol))
    rec.status = Status::pass;
  else
    rec.status = Status::inconclusive;
  return rec;
}

// ---------------------------------------------------------------------------
// limsup of ratios and the "ratio tends to zero" test

/// Running maximum of h/phi over doubling windows; A_hat is the last window maximum.
template <class H, class Phi>
ConditionRecord ratio_limsup(const H& h, const Phi& phi, const CheckConfig& cfg, std::string name = "limsup_ratio_finite") {
  cfg.validate();
  auto ratio = [&](double t) {
    return detail::ratio_value(h(t), phi(t), "ratio_limsup");
  };
  const auto windows = detail::doubling_windows(ratio, cfg.s_min, cfg.horizon, cfg.window_samples);
  ConditionRecord rec;
  rec.name = std::move(name);
  rec.horizon = cfg.horizon;
  rec.witness.table_columns = {"window_end", "max_ratio"};
  std::vector<double> maxima;
  for (const auto& w : windows) {
    maxima.push_back(w.max);
    rec.witness.table.push_back({w.hi, w.max});
  }
  rec.witness.values["A_hat"] = maxima.back();
  if (maxima.size() < 2) rec.status = Status::inconclusive;
  else if (detail::last_step_stable(maxima, cfg.stability_tol)) rec.status = Status::pass;
  else if (detail::last_steps_growing(maxima, cfg.trend_windows, cfg.growth_tol)) rec.status = Status::fail;
  else rec.status = Status::inconclusive;
  return rec;
}

/// num/den -> 0: window maxima non-increasing and the last one below ratio_zero_tol.
template <class N, class D>
ConditionRecord ratio_to_zero(std::string name, const N& num, const D& den, const CheckConfig& cfg) {
  cfg.validate();
  auto ratio = [&](double t) {
    return detail::ratio_value(num(t), den(t), name);
  };
  const auto windows = detail::doubling_windows(ratio, cfg.s_min, cfg.horizon, cfg.window_samples);
  ConditionRecord rec;
  rec.name = std::move(name);
  rec.horizon = cfg.horizon;
  rec.witness.table_columns = {"window_end", "max_ratio"};
  std::vector<double> maxima;
  for (const auto& w : windows) {
    maxima.push_back(w.max);
    rec.witness.table.push_back({w.hi, w.max});
  }
  rec.witness.values["last_window_max"] = maxima.back();
  rec.witness.values["threshold"] = cfg.ratio_zero_tol;
  bool floor_or_growth = maxima.size() > static_cast<std::size_t>(cfg.trend_windows);
  for (std::size_t i = maxima.size() - std::min<std::size_t>(maxima.size() - 1, cfg.trend_windows); i < maxima.size(); ++i)
    if (maxima[i] < maxima[i - 1] * (1.0 - cfg.stability_tol)) floor_or_growth = false;
  const bool stable = maxima.size() >= 2 && detail::last_step_stable(maxima, cfg.stability_tol);
  if (stable && maxima.back() <= cfg.ratio_zero_tol) rec.status = Status::pass;
  else if (floor_or_growth && maxima.back() > cfg.ratio_zero_tol) rec.status = Status::fail;
  else rec.status = Status::inconclusive;
  return rec;
}

// ---------------------------------------------------------------------------
// Assumptions A/B/C for the dissipative evolution problem

enum class Assumption { A, B, C };

inline const char* to_string(Assumption a) {
  switch (a) {
    case Assumption::A: return "A";
    case Assumption::B: return "B";
    case Assumption::C: return "C";
  }
  return "?";
}

template <class Gamma, class Beta>
HypothesisReport assumption_check(const Gamma& gamma, const Beta& beta, Assumption which, double alpha,
                                  const CheckConfig& cfg) {
  cfg.validate();
  HypothesisReport rep;
  rep.theorem = std::string("assumption-") + to_string(which);
  auto beta_over_gamma = [&](double t) { return detail::ratio_value(beta(t), gamma(t), "beta/gamma"); };
  switch (which) {
    case Assumption::A:
      rep.add(tail_condition("integral_gamma_diverges", gamma, false, cfg));
      rep.add(ratio_to_zero("beta_over_gamma_to_zero", beta, gamma, cfg));
      break;
    case Assumption::B:
      rep.add(tail_condition("integral_gamma_diverges", gamma, false, cfg));
      rep.add(tail_condition("integral_beta_over_gamma_converges", beta_over_gamma, true, cfg));
      break;
    case Assumption::C: {
      if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("assumption C needs alpha in (0, 1]");
      rep.add(tail_condition("integral_beta_converges", beta, true, cfg));
      auto envelope = [alpha](double t) { return std::pow(1.0 + t, -alpha); };
      auto t_power = [alpha](double t) { return std::pow(t, -alpha); };
      rep.add(ratio_limsup(gamma, envelope, cfg, "gamma_is_O_of_power"));
      rep.add(ratio_limsup(beta, t_power, cfg, "limsup_beta_t_alpha_finite"));
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Theorem-level compositions

namespace detail {

template <class F>
void add_state_fn_conditions(HypothesisReport& rep, const F& f, const CheckConfig& cfg, bool need_monotone,
                             bool need_inf) {
  ConditionRecord zero{"f_vanishes_at_zero", Status::inconclusive, {}, cfg.state_horizon};
  zero.witness.values["f(0)"] = f(0.0);
  zero.status = std::abs(f(0.0)) <= 1e-12 ? Status::pass : Status::fail;
  rep.add(zero);

  ConditionRecord pos{"f_positive_away_from_zero", Status::pass, {}, cfg.state_horizon};
  const double eps0 = cfg.inf_eps.empty() ? 0.01 : cfg.inf_eps.front();
  const auto lowest = inf_tail(f, eps0, cfg.state_horizon);
  pos.witness.values["min_f"] = lowest.value;
  pos.witness.values["eps"] = eps0;
  pos.status = lowest.value > 0.0 ? Status::pass : Status::fail;
  rep.add(pos);

  if (need_monotone) {
    ConditionRecord mono{"f_nondecreasing", Status::pass, {}, cfg.state_horizon};
    const bool ok = monotone_check(f, 0.0, cfg.state_horizon, 4097);
    mono.status = ok ? Status::pass : Status::fail;
    mono.witness.values["samples"] = 4097;
    rep.add(mono);
  }
  if (need_inf) {
    ConditionRecord m{"inf_tail_positive", Status::pass, {}, cfg.state_horizon};
    m.witness.table_columns = {"eps", "m_hat", "argmin"};
    for (double e : cfg.inf_eps) {
      const auto est = inf_tail(f, e, cfg.state_horizon);
      m.witness.table.push_back({e, est.value, est.argmin});
      m.witness.values["m_hat[eps=" + format_double(e) + "]"] = est.value;
      if (!(est.value > 0.0)) m.status = Status::fail;
    }
    rep.add(m);
  }
}

}  // namespace detail

/// g' <= -a f(g) + b with int a = inf and b/a -> 0.
template <class A, class F, class B>
HypothesisReport check_thm_2_11(const A& a, const F& f, const B& b, const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "thm-2-11";
  rep.add(tail_condition("integral_a_diverges", a, false, cfg));
  rep.add(ratio_to_zero("b_over_a_to_zero", b, a, cfg));
  detail::add_state_fn_conditions(rep, f, cfg, false, true);
  return rep;
}

/// g' <= -a f(g) + b with int a = inf, int b/a < inf and f non-decreasing.
template <class A, class F, class B>
HypothesisReport check_thm_2_13(const A& a, const F& f, const B& b, const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "thm-2-13";
  rep.add(tail_condition("integral_a_diverges", a, false, cfg));
  auto beta = [&](double t) { return detail::ratio_value(b(t), a(t), "b/a"); };
  rep.add(tail_condition("integral_beta_converges", beta, true, cfg));
  detail::add_state_fn_conditions(rep, f, cfg, true, false);
  return rep;
}

/// g' <= -a f(g) + b with regular a, limsup b/a < inf and int b < inf.
template <class A, class F, class B>
HypothesisReport check_thm_2_14(const A& a, const F& f, const B& b, double C, const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "thm-2-14";
  rep.add(regularity_profile(a, C, cfg));
  rep.add(ratio_limsup(b, a, cfg, "K_finite"));
  rep.add(tail_condition("integral_b_converges", b, true, cfg));
  detail::add_state_fn_conditions(rep, f, cfg, true, false);
  return rep;
}

/// Uniform continuity of F(., v) built on [0, T] with the given step.
inline HypothesisReport check_thm_2_1(const BivariateFn& f, double v, double step, const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "thm-2-1@v=" + format_double(v);
  const auto F = build_F(f, v, uniform_grid(cfg.horizon, step), cfg.zeta_resolution, cfg.quad_tol);
  auto rec = uc_certificate(F, cfg);
  rec.witness.values["v"] = v;
  rep.add(std::move(rec));
  return rep;
}

/// Regularity of phi plus (when f is supplied) the integral growth bound.
template <class Phi>
HypothesisReport check_thm_2_4(const Phi& phi, double C, const BivariateFn* f, double a_bound,
                               const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "thm-2-4";
  rep.add(regularity_profile(phi, C, cfg));
  if (f != nullptr) rep.add(growth_bound_check(*f, a_bound, phi, GrowthMode::integral_theta(), cfg));
  else rep.notes.push_back("growth bound not checked: no bivariate f supplied");
  return rep;
}

/// Power-law specialization: alpha in (0,1], regularity of (1+t)^-alpha with C = 1/2, kappa bound.
inline HypothesisReport check_thm_2_7(double alpha, const BivariateFn* f, double a_bound, const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "thm-2-7";
  ConditionRecord range{"alpha_in_unit_interval", alpha > 0.0 && alpha <= 1.0 ? Status::pass : Status::fail, {}, 0.0};
  range.witness.values["alpha"] = alpha;
  rep.add(range);
  auto phi = [alpha](double t) { return std::pow(1.0 + t, -alpha); };
  rep.add(regularity_profile(phi, 0.5, cfg));
  if (f != nullptr) rep.add(growth_bound_check(*f, a_bound, phi, GrowthMode::power_law(alpha), cfg));
  else rep.notes.push_back("growth bound not checked: no bivariate f supplied");
  return rep;
}

template <class H, class Phi>
HypothesisReport check_cor_2_9(const H& h, const Phi& phi, const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "cor-2-9";
  rep.add(ratio_limsup(h, phi, cfg, "limsup_h_over_phi_finite"));
  return rep;
}

template <class H>
HypothesisReport check_cor_2_10(const H& h, double alpha, const CheckConfig& cfg) {
  HypothesisReport rep;
  rep.theorem = "cor-2-10";
  ConditionRecord range{"alpha_in_unit_interval", alpha > 0.0 && alpha <= 1.0 ? Status::pass : Status::fail, {}, 0.0};
  range.witness.values["alpha"] = alpha;
  rep.add(range);
  auto t_power = [alpha](double t) { return std::pow(t, -alpha); };
  rep.add(ratio_limsup(h, t_power, cfg, "limsup_h_t_alpha_finite"));
  return rep;
}

/// Whatever functions a scenario supplies; each checker runs only when its inputs are present.
struct TheoremInputs {
  std::optional<UnivariateFn> a, b, f_state;   // surrogate dynamics g' <= -a f(g) + b
  std::optional<UnivariateFn> gamma, beta;     // dissipation rate and forcing norm
  std::optional<UnivariateFn> phi, h;
  std::optional<BivariateFn> f_bivariate;
  std::vector<double> levels;                  // v values for F(t, v)
  double F_step = 0.1;
  double F_horizon = 200.0;
  std::optional<double> C, alpha, a_bound;
};

inline int status_rank(Status s) {
  switch (s) {
    case Status::pass: return 0;
    case Status::inconclusive: return 1;
    case Status::fail: return 2;
  }
  return 1;
}

/// Runs every checker whose inputs are present (or only `targets` when non-empty);
/// reports are sorted pass, inconclusive, fail and by theorem id within a status.
inline std::vector<HypothesisReport> applicable_theorems(const TheoremInputs& in, const CheckConfig& cfg,
                                                         const std::vector<std::string>& targets = {}) {
  auto wanted = [&](const std::string& id) {
    return targets.empty() || std::find(targets.begin(), targets.end(), id) != targets.end();
  };
  auto require = [&](bool ok, const std::string& id) {
    if (!ok && !targets.empty() && wanted(id)) throw ConfigError("theorem " + id + " requested but its inputs are missing");
    return ok && wanted(id);
  };
  std::vector<HypothesisReport> out;
  const bool surrogate = in.a && in.b && in.f_state;
  if (require(surrogate, "thm-2-11")) out.push_back(check_thm_2_11(*in.a, *in.f_state, *in.b, cfg));
  if (require(surrogate, "thm-2-13")) out.push_back(check_thm_2_13(*in.a, *in.f_state, *in.b, cfg));
  if (require(surrogate, "thm-2-14"))
    out.push_back(check_thm_2_14(*in.a, *in.f_state, *in.b, in.C.value_or(0.5), cfg));
  const bool dissipative = in.gamma && in.beta;
  if (require(dissipative, "assumption-A")) out.push_back(assumption_check(*in.gamma, *in.beta, Assumption::A, 1.0, cfg));
  if (require(dissipative, "assumption-B")) out.push_back(assumption_check(*in.gamma, *in.beta, Assumption::B, 1.0, cfg));
  if (require(dissipative && in.alpha.has_value(), "assumption-C"))
    out.push_back(assumption_check(*in.gamma, *in.beta, Assumption::C, *in.alpha, cfg));
  if (require(in.f_bivariate && !in.levels.empty(), "thm-2-1")) {
    CheckConfig uc = cfg;
    uc.horizon = in.F_horizon;
    for (double v : in.levels) out.push_back(check_thm_2_1(*in.f_bivariate, v, in.F_step, uc));
  }
  const BivariateFn* fb = in.f_bivariate ? &*in.f_bivariate : nullptr;
  if (require(in.phi && in.C, "thm-2-4"))
    out.push_back(check_thm_2_4(*in.phi, *in.C, in.a_bound ? fb : nullptr, in.a_bound.value_or(1.0), cfg));
  if (require(in.alpha && fb && in.a_bound, "thm-2-7")) out.push_back(check_thm_2_7(*in.alpha, fb, *in.a_bound, cfg));
  if (require(in.h && in.phi, "cor-2-9")) out.push_back(check_cor_2_9(*in.h, *in.phi, cfg));
  if (require(in.h && in.alpha, "cor-2-10")) out.push_back(check_cor_2_10(*in.h, *in.alpha, cfg));
  for (const auto& t : targets) {
    static const std::vector<std::string> known{"thm-2-1", "thm-2-4", "thm-2-7", "cor-2-9", "cor-2-10", "thm-2-11",
                                                "thm-2-13", "thm-2-14", "assumption-A", "assumption-B", "assumption-C"};
    if (std::find(known.begin(), known.end(), t) == known.end()) throw ConfigError("unknown theorem id '" + t + "'");
  }
  std::stable_sort(out.begin(), out.end(), [](const HypothesisReport& x, const HypothesisReport& y) {
    const int rx = status_rank(x.overall()), ry = status_rank(y.overall());
    return rx != ry ? rx < ry : x.theorem < y.theorem;
  });
  return out;
}

}  // namespace decaykit
