#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/numfmt.hpp"
#include "decaykit/quadrature.hpp"
#include "decaykit/trajectory.hpp"

namespace decaykit {

enum class Scheme { rk4, semi_implicit };

inline const char* to_string(Scheme s) { return s == Scheme::rk4 ? "rk4" : "semi_implicit"; }

struct SolverConfig {
  Scheme scheme = Scheme::rk4;
  double dt = 1e-2;
  double t_end = 10.0;
  double atol = 1e-10;
  double rtol = 1e-8;
  std::size_t max_steps = 50'000'000;
  bool halve_on_tolerance = false;  // step doubling check, halving dt until it passes
  std::size_t max_records = 20001;  // recorded samples are thinned to at most this many

  void validate() const {
    if (!(t_end > 0.0)) throw ConfigError("solver t_end must be positive");
    if (!(dt > 0.0)) throw ConfigError("solver dt must be positive");
    if (!(atol > 0.0) || !(rtol > 0.0)) throw ConfigError("solver tolerances must be positive");
    if (max_steps == 0 || max_records < 2) throw ConfigError("solver step/record limits too small");
  }

  std::size_t steps() const { return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)); }
  std::size_t record_stride() const {
    const std::size_t n = steps();
    return std::max<std::size_t>(1, (n + max_records - 2) / (max_records - 1));
  }
};

namespace detail {

inline double rk4_scalar(const std::function<double(double, double)>& rhs, double t, double g, double h) {
  const double k1 = rhs(t, g);
  const double k2 = rhs(t + 0.5 * h, g + 0.5 * h * k1);
  const double k3 = rhs(t + 0.5 * h, g + 0.5 * h * k2);
  const double k4 = rhs(t + h, g + h * k3);
  return g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Integrates the equality g' = -a(t) f(g) + b(t) with fixed-step RK4.
///
/// g models a norm: stage states are clipped at 0 before f is evaluated and a
/// negative step result is clipped to 0 with the event counted in metadata.
/// Running out of max_steps returns a partial trajectory with complete = false.
template <class A, class F, class B>
Trajectory solve_surrogate(const A& a, const F& f, const B& b, double g0, const SolverConfig& cfg) {
  cfg.validate();
  if (!(g0 >= 0.0)) throw ConfigError("surrogate initial value must be >= 0");
  auto rhs = [&](double t, double g) { return -a(t) * f(std::max(g, 0.0)) + b(t); };
  Trajectory traj;
  traj.metadata["scheme"] = "rk4";
  traj.metadata["model"] = "surrogate";
  traj.metadata["dt"] = format_double(cfg.dt);
  traj.columns = {"g"};
  traj.push(0.0, g0);

  const std::size_t n = cfg.steps();
  const std::size_t stride = cfg.record_stride();
  std::size_t clips = 0;
  double first_clip = -1.0;
  double t = 0.0, g = g0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k >= cfg.max_steps) {
      traj.complete = false;
      traj.metadata["incomplete_reason"] = "step budget exhausted";
      break;
    }
    const double t_next = (k + 1 == n) ? cfg.t_end : std::min(cfg.t_end, cfg.dt * static_cast<double>(k + 1));
    const double h = t_next - t;
    double next;
    if (cfg.halve_on_tolerance) {
      double sub = h;
      int parts = 1;
      for (;;) {
        double coarse = g, fine = g, tt = t;
        for (int i = 0; i < parts; ++i) {
          coarse = detail::rk4_scalar(rhs, tt, coarse, sub);
          fine = detail::rk4_scalar(rhs, tt + 0.5 * sub, detail::rk4_scalar(rhs, tt, fine, 0.5 * sub), 0.5 * sub);
          tt += sub;
        }
        if (std::abs(coarse - fine) <= cfg.atol + cfg.rtol * std::abs(fine) || parts >= (1 << 20)) {
          next = fine;
          break;
        }
        parts *= 2;
        sub *= 0.5;
      }
    } else {
      next = detail::rk4_scalar(rhs, t, g, h);
    }
    t = t_next;
    if (!std::isfinite(next)) {
      traj.complete = false;
      traj.metadata["incomplete_reason"] = "non-finite state at t=" + format_double(t);
      break;
    }
    if (next < 0.0) {
      if (clips++ == 0) first_clip = t;
      next = 0.0;
    }
    g = next;
    if ((k + 1) % stride == 0 || k + 1 == n) traj.push(t, g);
  }
  traj.metadata["clip_events"] = std::to_string(clips);
  if (clips > 0) traj.metadata["first_clip_time"] = format_double(first_clip);
  return traj;
}

// ---------------------------------------------------------------------------
// Monotone clock s(t) = integral of a over [0, t]

/// Forward tabulation of s(t) plus exact-quadrature evaluation and inverse t(s).
template <class A>
class MonotoneMap {
 public:
  MonotoneMap(A a, double t_end, double tol, std::size_t knots = 4097) : a_(std::move(a)), tol_(tol) {
    if (!(t_end > 0.0)) throw ConfigError("reparameterize needs t_end > 0");
    if (!(tol > 0.0)) throw ConfigError("reparameterize needs tol > 0");
    t_ = linspace(0.0, t_end, knots);
    for (double t : linspace(0.0, t_end, 8 * knots))
      if (!(a_(t) > 0.0)) throw ValidationError("time change rate a(t) must be positive, a(" + format_double(t) + ") = " + format_double(a_(t)));
    s_.assign(t_.size(), 0.0);
    for (std::size_t i = 1; i < t_.size(); ++i) s_[i] = s_[i - 1] + integrate(a_, t_[i - 1], t_[i], tol_);
    for (std::size_t i = 1; i < s_.size(); ++i)
      if (!(s_[i] > s_[i - 1])) throw ValidationError("time change s(t) is not strictly increasing");
  }

  double t_end() const { return t_.back(); }
  double s_end() const { return s_.back(); }
  const std::vector<double>& t_knots() const { return t_; }
  const std::vector<double>& s_knots() const { return s_; }

  /// s(t) = S[k] + integral of a over [t_k, t].
  double forward(double t) const {
    if (!(t >= 0.0) || t > t_.back()) throw DomainError("clock map queried at t=" + format_double(t) + " outside [0, t_end]");
    const std::size_t k = segment(t_, t);
    return s_[k] + integrate(a_, t_[k], t, tol_);
  }

  /// t(s) by bisection-safeguarded Newton on the segment located by binary search.
  double inverse(double s) const {
    if (!(s >= 0.0) || s > s_.back() * (1.0 + 1e-15)) throw DomainError("clock map queried at s=" + format_double(s) + " outside [0, s_end]");
    s = std::min(s, s_.back());
    const std::size_t k = segment(s_, s);
    double lo = t_[k], hi = t_[k + 1];
    double t = lo + (hi - lo) * (s - s_[k]) / (s_[k + 1] - s_[k]);
    for (int it = 0; it < 100; ++it) {
      const double r = s_[k] + integrate(a_, t_[k], t, tol_) - s;
      if (r > 0.0) hi = t;
      else lo = t;
      if (std::abs(r) <= 1e-15 * (1.0 + std::abs(s)) || hi - lo <= 4e-16 * (1.0 + hi)) break;
      double next = t - r / a_(t);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      t = next;
    }
    return t;
  }

 private:
  static std::size_t segment(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t k = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(k, xs.size() - 2);
  }

  A a_;
  double tol_;
  std::vector<double> t_, s_;
};

template <class A>
MonotoneMap<A> reparameterize(A a, double t_end, double tol, std::size_t knots = 4097) {
  return MonotoneMap<A>(std::move(a), t_end, tol, knots);
}

/// Resamples g(t) at t(s) on a uniform s grid: w(s) = g(t(s)).
template <class A>
Trajectory transform_trajectory(const Trajectory& traj, const MonotoneMap<A>& map, std::size_t samples = 0) {
  if (traj.empty() || traj.start_time() != 0.0) throw DomainError("trajectory must start at t = 0");
  const double t_last = std::min(traj.end_time(), map.t_end());
  if (traj.end_time() > map.t_end() * (1.0 + 1e-12)) throw DomainError("trajectory extends beyond the clock map range");
  const double s_last = map.forward(t_last);
  if (samples == 0) samples = traj.size();
  samples = std::max<std::size_t>(samples, 2);
  Trajectory out(traj.dim());
  out.metadata = traj.metadata;
  out.metadata["clock"] = "s";
  out.metadata["map_t_end"] = format_double(map.t_end());
  out.metadata["map_s_end"] = format_double(map.s_end());
  out.columns = traj.columns;
  std::vector<double> row(traj.dim());
  for (double s : linspace(0.0, s_last, samples)) {
    const double t = std::min(map.inverse(s), t_last);
    for (std::size_t c = 0; c < traj.dim(); ++c) row[c] = traj.at(t, c);
    out.push(s, row);
  }
  out.complete = traj.complete;
  return out;
}

// ---------------------------------------------------------------------------
// Vector systems

using State = std::vector<double>;

namespace detail {

inline void axpy(State& y, double a, const State& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline bool all_finite(const State& u) {
  return std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); });
}

/// Solves M x = rhs in place by Gaussian elimination with partial pivoting.
inline State dense_solve(std::vector<double> M, State rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(M[r * n + c]) > std::abs(M[p * n + c])) p = r;
    if (M[p * n + c] == 0.0) throw NumericError("singular matrix in semi-implicit step");
    if (p != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(M[c * n + k], M[p * n + k]);
      std::swap(rhs[c], rhs[p]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = M[r * n + c] / M[c * n + c];
      for (std::size_t k = c; k < n; ++k) M[r * n + k] -= m * M[c * n + k];
      rhs[r] -= m * rhs[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    double acc = rhs[c];
    for (std::size_t k = c + 1; k < n; ++k) acc -= M[c * n + k] * rhs[k];
    rhs[c] = acc / M[c * n + c];
  }
  return rhs;
}

}  // namespace detail

/// Reference solver for u' = field(t, u).
///
/// rk4: classical fixed-step RK4. semi_implicit: linearly implicit Euler,
/// (I - dt J) du = dt field(t, u) with a finite-difference Jacobian.
/// A non-finite state aborts with the partial trajectory (complete = false).
template <class Field>
Trajectory solve_system(const Field& field, const State& u0, const SolverConfig& cfg) {
  cfg.validate();
  if (u0.empty()) throw ConfigError("solve_system needs a non-empty initial state");
  Trajectory traj(u0.size());
  traj.metadata["scheme"] = to_string(cfg.scheme);
  traj.metadata["dt"] = format_double(cfg.dt);
  traj.push(0.0, u0);
  const std::size_t n = cfg.steps();
  const std::size_t stride = cfg.record_stride();
  const std::size_t dim = u0.size();
  State u = u0;
  double t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k >= cfg.max_steps) {
      traj.complete = false;
      traj.metadata["incomplete_reason"] = "step budget exhausted";
      break;
    }
    const double t_next = (k + 1 == n) ? cfg.t_end : std::min(cfg.t_end, cfg.dt * static_cast<double>(k + 1));
    const double h = t_next - t;
    if (cfg.scheme == Scheme::rk4) {
      const State k1 = field(t, u);
      State tmp = u;
      detail::axpy(tmp, 0.5 * h, k1);
      const State k2 = field(t + 0.5 * h, tmp);
      tmp = u;
      detail::axpy(tmp, 0.5 * h, k2);
      const State k3 = field(t + 0.5 * h, tmp);
      tmp = u;
      detail::axpy(tmp, h, k3);
      const State k4 = field(t + h, tmp);
      for (std::size_t i = 0; i < dim; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } else {
      const State f0 = field(t, u);
      std::vector<double> M(dim * dim, 0.0);
      for (std::size_t j = 0; j < dim; ++j) {
        State up = u;
        const double eps = 1e-7 * (1.0 + std::abs(u[j]));
        up[j] += eps;
        const State fj = field(t, up);
        for (std::size_t i = 0; i < dim; ++i) M[i * dim + j] = -h * (fj[i] - f0[i]) / eps;
      }
      for (std::size_t i = 0; i < dim; ++i) M[i * dim + i] += 1.0;
      State rhs = f0;
      for (double& v : rhs) v *= h;
      const State du = detail::dense_solve(std::move(M), std::move(rhs));
      detail::axpy(u, 1.0, du);
    }
    t = t_next;
    if (!detail::all_finite(u)) {
      traj.complete = false;
      traj.metadata["incomplete_reason"] = "non-finite state at t=" + format_double(t);
      break;
    }
    if ((k + 1) % stride == 0 || k + 1 == n) traj.push(t, u);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Peano delayed-argument approximations

/// u_n(t) = u0 + integral over [0, t] of [A(s, u_n(s - 1/n)) + f(s)] ds, with u_n = u0 for t <= 0.
///
/// Advanced on a fixed grid with the cumulative trapezoid rule; the delayed
/// state is read from the history buffer by linear interpolation.
template <class Field, class Forcing>
std::vector<Trajectory> peano_iterates(const Field& A, const Forcing& f, const State& u0,
                                       const std::vector<int>& n_list, double t_end, double dt) {
  if (u0.empty()) throw ConfigError("peano_iterates needs a non-empty initial state");
  if (!(t_end > 0.0) || !(dt > 0.0)) throw ConfigError("peano_iterates needs t_end > 0 and dt > 0");
  int n_max = 0;
  for (int n : n_list) {
    if (n < 1) throw ConfigError("peano delay index n must be >= 1");
    n_max = std::max(n_max, n);
  }
  if (dt > 1.0 / (2.0 * n_max) * (1.0 + 1e-12))
    throw ConfigError("dt = " + format_double(dt) + " too coarse: the delay 1/" + std::to_string(n_max) +
                      " must span at least two steps");
  const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const std::vector<double> grid = linspace(0.0, t_end, steps + 1);
  const std::size_t dim = u0.size();

  std::vector<Trajectory> out;
  for (int n : n_list) {
    const double delay = 1.0 / n;
    std::vector<State> hist{u0};
    auto delayed = [&](double s) -> State {
      const double q = s - delay;
      if (q <= 0.0) return u0;
      auto it = std::upper_bound(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(hist.size()), q);
      const auto i = static_cast<std::size_t>(it - grid.begin());
      if (i >= hist.size()) throw NumericError("peano history buffer underrun");
      const double w = (q - grid[i - 1]) / (grid[i] - grid[i - 1]);
      State r(dim);
      for (std::size_t c = 0; c < dim; ++c) r[c] = hist[i - 1][c] + w * (hist[i][c] - hist[i - 1][c]);
      return r;
    };
    auto integrand = [&](double s) {
      State v = A(s, delayed(s));
      const State fs = f(s);
      for (std::size_t c = 0; c < dim; ++c) v[c] += fs[c];
      return v;
    };
    Trajectory traj(dim);
    traj.metadata["model"] = "peano";
    traj.metadata["delay_index"] = std::to_string(n);
    traj.metadata["dt"] = format_double(dt);
    traj.push(0.0, u0);
    State prev_integrand = integrand(0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const State cur = integrand(grid[k]);
      State u = hist.back();
      const double h = grid[k] - grid[k - 1];
      for (std::size_t c = 0; c < dim; ++c) u[c] += 0.5 * h * (prev_integrand[c] + cur[c]);
      if (!detail::all_finite(u)) {
        traj.complete = false;
        traj.metadata["incomplete_reason"] = "non-finite state at t=" + format_double(grid[k]);
        break;
      }
      hist.push_back(u);
      traj.push(grid[k], u);
      prev_integrand = cur;
    }
    out.push_back(std::move(traj));
  }
  return out;
}

/// Sup over shared sample times of the Euclidean distance between two trajectories.
inline double sup_distance(const Trajectory& x, const Trajectory& reference) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = x.time(i);
    if (t < reference.start_time() || t > reference.end_time()) continue;
    double d2 = 0.0;
    for (std::size_t c = 0; c < x.dim(); ++c) {
      const double d = x.value(i, c) - reference.at(t, c);
      d2 += d * d;
    }
    worst = std::max(worst, std::sqrt(d2));
  }
  return worst;
}

}  // namespace decaykit
