#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/numfmt.hpp"
#include "decaykit/odesolve.hpp"
#include "decaykit/quadrature.hpp"
#include "decaykit/trajectory.hpp"

namespace decaykit {

/// Interior points x_i = (i + 1) h of (0, length) with h = length / (n + 1).
struct Grid1D {
  double length = std::numbers::pi;
  std::size_t n = 199;

  Grid1D() = default;
  Grid1D(double len, std::size_t points) : length(len), n(points) { validate(); }

  void validate() const {
    if (n < 3) throw ConfigError("grid needs at least 3 interior points");
    if (!(length > 0.0)) throw ConfigError("grid length must be positive");
  }
  double spacing() const { return length / static_cast<double>(n + 1); }
  double x(std::size_t i) const { return spacing() * static_cast<double>(i + 1); }
};

/// Discrete L2 inner product with weight h.
inline double inner(std::span<const double> u, std::span<const double> v, double h) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return h * acc;
}

inline double l2_norm(std::span<const double> u, double h) { return std::sqrt(inner(u, u, h)); }

/// Dirichlet Laplacian stencil (1, -2, 1) / h^2 with the boundary values eliminated.
class DiscreteOperator {
 public:
  explicit DiscreteOperator(Grid1D grid) : grid_(grid) {
    grid_.validate();
    const double h = grid_.spacing();
    const double s = std::sin(std::numbers::pi * h / (2.0 * grid_.length));
    lambda1_ = 4.0 / (h * h) * s * s;
  }

  const Grid1D& grid() const { return grid_; }
  std::size_t size() const { return grid_.n; }

  /// Smallest eigenvalue of -L.
  double lambda1() const { return lambda1_; }

  void apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = grid_.n;
    const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < n ? u[i + 1] : 0.0;
      out[i] = (left - 2.0 * u[i] + right) * inv_h2;
    }
  }

  std::vector<double> apply(std::span<const double> u) const {
    std::vector<double> out(u.size());
    apply(u, out);
    return out;
  }

  /// Solves (I - c L) x = rhs with the Thomas algorithm; c >= 0 keeps it diagonally dominant.
  std::vector<double> solve_shifted(double c, std::span<const double> rhs) const {
    const std::size_t n = grid_.n;
    const double off = -c / (grid_.spacing() * grid_.spacing());
    const double diag = 1.0 - 2.0 * off;
    std::vector<double> cp(n), x(rhs.begin(), rhs.end());
    cp[0] = off / diag;
    x[0] /= diag;
    for (std::size_t i = 1; i < n; ++i) {
      const double m = diag - off * cp[i - 1];
      cp[i] = off / m;
      x[i] = (x[i] - off * x[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
    return x;
  }

 private:
  Grid1D grid_;
  double lambda1_ = 0.0;
};

inline DiscreteOperator assemble_operator(const Grid1D& grid) { return DiscreteOperator(grid); }

/// Nonlinearity h(u) from a closed family, all with u h(u) >= 0.
struct Nonlinearity {
  enum class Kind { none, cubic, power };
  Kind kind = Kind::none;
  double p = 3.0;  // power: u |u|^(p-1)

  static Nonlinearity none() { return {Kind::none, 1.0}; }
  static Nonlinearity cubic() { return {Kind::cubic, 3.0}; }
  static Nonlinearity power(double p) { return {Kind::power, p}; }

  double operator()(double u) const {
    switch (kind) {
      case Kind::none: return 0.0;
      case Kind::cubic: return u * u * u;
      case Kind::power: return u * std::pow(std::abs(u), p - 1.0);
    }
    return 0.0;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::none: return "none";
      case Kind::cubic: return "cubic";
      case Kind::power: return "power(" + format_double(p) + ")";
    }
    return "none";
  }
};

/// Grid function profiles; `normalized` scales to unit discrete L2 norm.
inline std::vector<double> sine_profile(const Grid1D& grid, int mode = 1, double amplitude = 1.0) {
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    v[i] = amplitude * std::sin(mode * std::numbers::pi * grid.x(i) / grid.length);
  return v;
}

inline std::vector<double> normalized(std::vector<double> v, double h) {
  const double nrm = l2_norm(v, h);
  if (nrm > 0.0)
    for (double& x : v) x /= nrm;
  return v;
}

/// u' = gamma(t) [L u - h(u)] + amplitude(t) profile(x), u(0) = u0, Dirichlet boundary.
struct PDEScenario {
  UnivariateFn gamma = UnivariateFn::constant(1.0);
  UnivariateFn amplitude = UnivariateFn::constant(0.0);
  std::vector<double> profile;  // empty means zero forcing
  Nonlinearity h = Nonlinearity::none();
  std::vector<double> u0;
  std::optional<double> k;  // forcing decay exponent, informational

  double forcing_norm(double t, double grid_h) const {
    return profile.empty() ? 0.0 : amplitude(t) * l2_norm(profile, grid_h);
  }

  void validate(const Grid1D& grid, double t_end) const {
    if (u0.size() != grid.n) throw ConfigError("initial state does not match the grid size");
    if (!profile.empty() && profile.size() != grid.n) throw ConfigError("forcing profile does not match the grid size");
    for (double v : u0)
      if (!std::isfinite(v)) throw ValidationError("initial state is not finite");
    for (double u : linspace(-10.0, 10.0, 401))
      if (u * h(u) < 0.0) throw ValidationError("nonlinearity violates u h(u) >= 0 at u=" + format_double(u));
    for (double t : linspace(0.0, t_end, 201))
      if (!(gamma(t) > 0.0)) throw ValidationError("gamma must be positive, gamma(" + format_double(t) + ") = " + format_double(gamma(t)));
  }
};

struct PDEConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> snapshot_times;
  std::size_t max_records = 20001;
  double residual_tol = 1e-8;

  void validate() const {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("pde dt and t_end must be positive");
    if (max_records < 2) throw ConfigError("pde max_records too small");
    if (!(residual_tol >= 0.0)) throw ConfigError("pde residual tolerance must be >= 0");
  }
  std::size_t steps() const { return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9)); }
};

/// Semi-implicit stepping: gamma(t_mid) L implicit, h(u) and forcing explicit at t_mid.
class SemiImplicitStepper {
 public:
  SemiImplicitStepper(const PDEScenario& sc, const DiscreteOperator& op) : sc_(sc), op_(op), u_(sc.u0) {}

  double time() const { return t_; }
  const std::vector<double>& state() const { return u_; }

  void step(double dt) { step_to(t_ + dt); }

  /// Advances to t_next exactly (no drift from summing dt).
  void step_to(double t_next) {
    const double dt = t_next - t_;
    const double tm = t_ + 0.5 * dt;
    const double g = sc_.gamma(tm);
    std::vector<double> rhs = u_;
    const double amp = sc_.profile.empty() ? 0.0 : sc_.amplitude(tm);
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      rhs[i] -= dt * g * sc_.h(u_[i]);
      if (amp != 0.0) rhs[i] += dt * amp * sc_.profile[i];
    }
    u_ = op_.solve_shifted(dt * g, rhs);
    t_ = t_next;
  }

 private:
  const PDEScenario& sc_;
  const DiscreteOperator& op_;
  std::vector<double> u_;
  double t_ = 0.0;
};

struct Snapshot {
  double time;
  std::vector<double> x, u;
};

struct SimulationResult {
  Trajectory norm;           // ||u(t)||
  std::vector<Snapshot> snapshots;
  double lambda1 = 0.0;
  double max_norm_residual = 0.0;  // max of d||u||/dt + gamma lambda1 ||u|| - ||f||
  std::size_t residual_violations = 0;
  bool complete = true;
  std::string abort_reason;
};

/// Runs the semi-implicit scheme and records the norm, snapshots and the
/// discrete norm inequality residual at every step.
inline SimulationResult simulate(const PDEScenario& sc, const Grid1D& grid, const PDEConfig& cfg) {
  cfg.validate();
  sc.validate(grid, cfg.t_end);
  const DiscreteOperator op(grid);
  const double h = grid.spacing();
  SimulationResult res;
  res.lambda1 = op.lambda1();
  res.norm.metadata["scheme"] = "semi_implicit";
  res.norm.metadata["dt"] = format_double(cfg.dt);
  res.norm.metadata["grid_n"] = std::to_string(grid.n);
  res.norm.metadata["lambda1"] = format_double(op.lambda1());
  res.norm.columns = {"norm"};

  std::vector<double> snap_times = cfg.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  auto take_snapshots = [&](double t, const std::vector<double>& u, double dt) {
    while (next_snap < snap_times.size() && snap_times[next_snap] <= t + 0.5 * dt) {
      Snapshot s{t, {}, u};
      for (std::size_t i = 0; i < grid.n; ++i) s.x.push_back(grid.x(i));
      res.snapshots.push_back(std::move(s));
      ++next_snap;
    }
  };

  SemiImplicitStepper stepper(sc, op);
  double prev_norm = l2_norm(stepper.state(), h);
  res.norm.push(0.0, prev_norm);
  take_snapshots(0.0, stepper.state(), cfg.dt);
  const std::size_t n = cfg.steps();
  const std::size_t stride = std::max<std::size_t>(1, (n + cfg.max_records - 2) / (cfg.max_records - 1));
  for (std::size_t k = 0; k < n; ++k) {
    const double t0 = stepper.time();
    const double t_next = (k + 1 == n) ? cfg.t_end : cfg.dt * static_cast<double>(k + 1);
    const double dt = t_next - t0;
    stepper.step_to(t_next);
    const auto& u = stepper.state();
    const double nrm = l2_norm(u, h);
    if (!std::isfinite(nrm)) {
      res.complete = false;
      res.abort_reason = "non-finite state at t=" + format_double(stepper.time());
      res.norm.complete = false;
      res.norm.metadata["incomplete_reason"] = res.abort_reason;
      break;
    }
    const double tm = t0 + 0.5 * dt;
    const double residual = (nrm - prev_norm) / dt + sc.gamma(tm) * op.lambda1() * nrm - sc.forcing_norm(tm, h);
    res.max_norm_residual = std::max(res.max_norm_residual, residual);
    if (residual > cfg.residual_tol) ++res.residual_violations;
    prev_norm = nrm;
    const double t = stepper.time();
    if ((k + 1) % stride == 0 || k + 1 == n) res.norm.push(t, nrm);
    take_snapshots(t, u, dt);
  }
  res.norm.metadata["max_norm_residual"] = format_double(res.max_norm_residual);
  return res;
}

struct ContractionReport {
  Trajectory distance;  // ||u(t) - v(t)||
  double max_increase = 0.0;  // largest single-step growth of the distance
  std::size_t violations = 0;
  double tol = 0.0;
  bool passed() const { return violations == 0; }
};

/// Steps two copies of the scheme from u0 and v0 and tracks the discrete ||u - v|| every step.
inline ContractionReport contraction_check(const PDEScenario& sc, const std::vector<double>& v0, const Grid1D& grid,
                                           const PDEConfig& cfg, double tol = 1e-8) {
  cfg.validate();
  PDEScenario other = sc;
  other.u0 = v0;
  sc.validate(grid, cfg.t_end);
  other.validate(grid, cfg.t_end);
  const DiscreteOperator op(grid);
  const double h = grid.spacing();
  SemiImplicitStepper su(sc, op), sv(other, op);
  auto dist = [&] {
    std::vector<double> d(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) d[i] = su.state()[i] - sv.state()[i];
    return l2_norm(d, h);
  };
  ContractionReport rep;
  rep.tol = tol;
  rep.distance.columns = {"distance"};
  double prev = dist();
  rep.distance.push(0.0, prev);
  const std::size_t n = cfg.steps();
  const std::size_t stride = std::max<std::size_t>(1, (n + cfg.max_records - 2) / (cfg.max_records - 1));
  for (std::size_t k = 0; k < n; ++k) {
    const double t_next = (k + 1 == n) ? cfg.t_end : cfg.dt * static_cast<double>(k + 1);
    su.step_to(t_next);
    sv.step_to(t_next);
    const double d = dist();
    rep.max_increase = std::max(rep.max_increase, d - prev);
    if (d - prev > tol) ++rep.violations;
    prev = d;
    if ((k + 1) % stride == 0 || k + 1 == n) rep.distance.push(su.time(), d);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Dissipativity probe

struct ProbeReport {
  double worst_margin = -std::numeric_limits<double>::infinity();  // max of lhs - rhs
  std::size_t samples = 0;
  std::size_t violations = 0;
  double tol = 0.0;
  bool passed() const { return violations == 0; }
};

using StatePair = std::pair<std::vector<double>, std::vector<double>>;

/// Uniform random grid states in [lo, hi]^n from a seeded generator.
inline std::vector<StatePair> random_state_pairs(std::size_t n, std::size_t count, double lo, double hi,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<StatePair> out(count);
  for (auto& [u, v] : out) {
    u.resize(n);
    v.resize(n);
    for (double& x : u) x = dist(rng);
    for (double& x : v) x = dist(rng);
  }
  return out;
}

/// A(t, u) = gamma(t) [L u - h(u)].
inline std::vector<double> apply_A(const PDEScenario& sc, const DiscreteOperator& op, double t,
                                   std::span<const double> u) {
  std::vector<double> out = op.apply(u);
  const double g = sc.gamma(t);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g * (out[i] - sc.h(u[i]));
  return out;
}

/// Checks <A(t,u) - A(t,v), u - v> <= -gamma(t) lambda1 ||u - v||^2 + tol on every sample.
inline ProbeReport dissipativity_probe(const PDEScenario& sc, const Grid1D& grid, const std::vector<StatePair>& pairs,
                                       const std::vector<double>& times, double tol = 1e-10) {
  const DiscreteOperator op(grid);
  const double h = grid.spacing();
  ProbeReport rep;
  rep.tol = tol;
  for (const auto& [u, v] : pairs) {
    if (u.size() != grid.n || v.size() != grid.n) throw ConfigError("probe state does not match the grid size");
    std::vector<double> d(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) d[i] = u[i] - v[i];
    const double dn2 = inner(d, d, h);
    for (double t : times) {
      const auto Au = apply_A(sc, op, t, u);
      const auto Av = apply_A(sc, op, t, v);
      std::vector<double> dA(grid.n);
      for (std::size_t i = 0; i < grid.n; ++i) dA[i] = Au[i] - Av[i];
      const double lhs = inner(dA, d, h);
      const double rhs = -sc.gamma(t) * op.lambda1() * dn2;
      const double margin = lhs - rhs;
      rep.worst_margin = std::max(rep.worst_margin, margin);
      ++rep.samples;
      if (margin > tol) ++rep.violations;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// A-priori bound B(t) = integral over [0, t] of ||f(s)|| exp(-c integral_s^t gamma) ds

struct AprioriBound {
  Trajectory curve;
  double sup_curve = 0.0;
  std::optional<double> sup_bound;  // c_f / (k - 1) for ||f|| = c_f (1 + t)^(-k), k > 1
  std::string sup_bound_note;
};

template <class Gamma, class Fnorm>
AprioriBound apriori_bound_curve(const Gamma& gamma, const Fnorm& fnorm, double c, const std::vector<double>& t_grid,
                                 double tol = 1e-11) {
  if (!(c > 0.0)) throw ConfigError("apriori_bound needs c > 0");
  if (t_grid.size() < 2 || t_grid.front() != 0.0) throw ConfigError("apriori_bound needs a grid starting at 0");
  AprioriBound out;
  out.curve.columns = {"bound"};
  out.curve.metadata["c"] = format_double(c);
  out.curve.push(0.0, 0.0);
  double B = 0.0;
  for (std::size_t j = 1; j < t_grid.size(); ++j) {
    const double t0 = t_grid[j - 1], t1 = t_grid[j];
    const double G01 = integrate(gamma, t0, t1, tol);
    auto integrand = [&](double s) { return fnorm(s) * std::exp(-c * (G01 - integrate(gamma, t0, s, tol))); };
    B = std::exp(-c * G01) * B + integrate(integrand, t0, t1, tol);
    out.curve.push(t1, B);
    out.sup_curve = std::max(out.sup_curve, B);
  }
  return out;
}

/// Bound curve plus the closed-form supremum when fnorm is c_f (1 + t)^(-k).
inline AprioriBound apriori_bound(const UnivariateFn& gamma, const UnivariateFn& fnorm, double c,
                                  const std::vector<double>& t_grid, double tol = 1e-11) {
  AprioriBound out = apriori_bound_curve(gamma, fnorm, c, t_grid, tol);
  if (const auto* pl = fnorm.as<family::PowerLaw>(); pl != nullptr && pl->shift == 1.0) {
    if (pl->alpha > 1.0) {
      out.sup_bound = pl->c / (pl->alpha - 1.0);
      out.sup_bound_note = "k=" + format_double(pl->alpha);
    } else {
      out.sup_bound_note = "unavailable: forcing exponent k=" + format_double(pl->alpha) + " violates k > 1";
    }
  } else if (fnorm.as<family::Constant>() != nullptr && fnorm(0.0) == 0.0) {
    out.sup_bound = 0.0;
    out.sup_bound_note = "zero forcing";
  } else {
    out.sup_bound_note = "unavailable: forcing norm is not of the form c (1 + t)^(-k)";
  }
  return out;
}

}  // namespace decaykit
