#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/quadrature.hpp"
#include "decaykit/trajectory.hpp"

namespace decaykit {

enum class DecayStatus { decays, no_decay, inconclusive };

inline const char* to_string(DecayStatus s) {
  switch (s) {
    case DecayStatus::decays: return "decays";
    case DecayStatus::no_decay: return "no_decay";
    case DecayStatus::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

inline DecayStatus parse_decay_status(const std::string& s) {
  if (s == "decays") return DecayStatus::decays;
  if (s == "no_decay") return DecayStatus::no_decay;
  if (s == "inconclusive") return DecayStatus::inconclusive;
  throw ConfigError("unknown decay status '" + s + "'");
}

/// Windows are [T/2, T], [T/4, T/2], ... counted back from the end time T.
struct WindowPolicy {
  int stable_windows = 3;     // no_decay needs this many consecutive stable windows
  double floor_rel_tol = 1e-2;  // relative spread of window infima still counted as stable
  int min_samples = 2;        // per window
};

struct DecayVerdict {
  DecayStatus status = DecayStatus::inconclusive;
  double last_window_sup = 0.0;
  double horizon = 0.0;
  std::optional<double> rate;   // fitted exponent for y ~ t^(-rate); diagnostic only
  std::optional<double> limit;  // floor estimate when no_decay
  std::vector<double> window_infima;  // latest window first
};

/// Least squares of log y against log t over the final decade [T/10, T].
inline std::optional<double> fit_decay_rate(const Trajectory& traj) {
  const double T = traj.end_time();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.time(i), y = traj.value(i);
    if (t < T / 10.0 || t <= 0.0) continue;
    if (!(y > 10.0 * std::numeric_limits<double>::epsilon())) return std::nullopt;
    const double lx = std::log(t), ly = std::log(y);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++n;
  }
  if (n < 3) return std::nullopt;
  const double den = static_cast<double>(n) * sxx - sx * sx;
  if (den <= 0.0) return std::nullopt;
  return -(static_cast<double>(n) * sxy - sx * sy) / den;
}

/// Finite-horizon surrogate for lim y(t) = 0.
///
/// decays: sup over the final window is <= eps. no_decay: the infima of the
/// last `stable_windows` doubling windows sit above eps and agree within
/// floor_rel_tol. Anything else (slow decay, short horizon) is inconclusive.
inline DecayVerdict decay_verdict(const Trajectory& traj, double eps, const WindowPolicy& policy = {}) {
  if (traj.dim() != 1) throw ConfigError("decay_verdict needs a scalar trajectory");
  if (!(eps > 0.0)) throw ConfigError("decay_verdict needs eps > 0");
  if (traj.size() < 2) throw ConfigError("trajectory shorter than one window");
  const double T = traj.end_time();
  const double t0 = traj.start_time();
  DecayVerdict out;
  out.horizon = T;

  auto window_stats = [&](double lo, double hi, double& sup, double& inf) {
    sup = -std::numeric_limits<double>::infinity();
    inf = std::numeric_limits<double>::infinity();
    int count = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const double t = traj.time(i);
      if (t < lo || t > hi) continue;
      const double y = traj.value(i);
      if (y < 0.0) throw ConfigError("decay_verdict needs a nonnegative trajectory");
      sup = std::max(sup, y);
      inf = std::min(inf, y);
      ++count;
    }
    return count;
  };

  double sup = 0, inf = 0;
  if (!(T / 2.0 >= t0) || window_stats(T / 2.0, T, sup, inf) < policy.min_samples)
    throw ConfigError("trajectory shorter than one window");
  out.last_window_sup = sup;
  out.window_infima.push_back(inf);
  for (int k = 1; k < policy.stable_windows; ++k) {
    const double hi = T / std::pow(2.0, k), lo = hi / 2.0;
    double s = 0, i = 0;
    if (lo < t0 || window_stats(lo, hi, s, i) < policy.min_samples) break;
    out.window_infima.push_back(i);
  }
  out.rate = fit_decay_rate(traj);

  if (out.last_window_sup <= eps) {
    out.status = DecayStatus::decays;
    return out;
  }
  const auto& inf_w = out.window_infima;
  bool floor = inf_w.size() >= static_cast<std::size_t>(policy.stable_windows);
  for (std::size_t i = 0; floor && i < inf_w.size(); ++i) {
    if (!(inf_w[i] > eps)) floor = false;
    if (i > 0 && std::abs(inf_w[i] - inf_w[i - 1]) > policy.floor_rel_tol * inf_w[i - 1]) floor = false;
  }
  if (floor) {
    out.status = DecayStatus::no_decay;
    out.limit = traj.value(traj.size() - 1);
  }
  return out;
}

/// Tail test of the integrand omega(y(t)) phi(t) along a computed trajectory.
template <class Omega, class Phi>
TailVerdict integral_certificate(const Trajectory& y, const Omega& omega, const Phi& phi, double tol,
                                 TailPolicy policy = {}) {
  if (y.dim() != 1) throw ConfigError("integral_certificate needs a scalar trajectory");
  auto integrand = [&](double t) { return omega(y.at(t)) * phi(t); };
  policy.first_window = std::min(policy.first_window, y.end_time());
  return tail_verdict(integrand, tol, policy, y.end_time());
}

struct IncrementCheck {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();  // max of increment - bound
  double tol = 0.0;
  bool passed() const { return violations == 0; }
};

/// Along w(s) checks w(s_j) - w(s_i) <= integral of beta over [s_i, s_j] + tol on sampled pairs.
template <class Beta>
IncrementCheck increment_bound_check(const Trajectory& w, const Beta& beta, std::size_t pair_count, std::uint64_t seed,
                                     double tol = 1e-6, double quad_tol = 1e-10) {
  if (w.dim() != 1 || w.size() < 2) throw ConfigError("increment check needs a scalar trajectory");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, w.size() - 1);
  IncrementCheck out;
  out.tol = tol;
  for (std::size_t p = 0; p < pair_count; ++p) {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    const double inc = w.value(j) - w.value(i);
    const double bound = integrate(beta, w.time(i), w.time(j), quad_tol);
    const double margin = inc - bound;
    out.worst_margin = std::max(out.worst_margin, margin);
    ++out.pairs;
    if (margin > tol) ++out.violations;
  }
  return out;
}

}  // namespace decaykit
