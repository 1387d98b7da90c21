#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "decaykit/catalog.hpp"
#include "decaykit/errors.hpp"
#include "decaykit/hypothesis.hpp"
#include "decaykit/numfmt.hpp"
#include "decaykit/odesolve.hpp"
#include "decaykit/pde.hpp"
#include "decaykit/scenario.hpp"
#include "decaykit/trajectory.hpp"
#include "decaykit/verdict.hpp"

namespace decaykit {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int violated = 1;
inline constexpr int inconclusive = 2;
inline constexpr int usage = 3;
}  // namespace exit_code

/// Command-line overrides; everything else comes from the config file.
struct RunOptions {
  std::optional<double> t_end;
  std::optional<double> tol;  // decay threshold epsilon
  std::optional<std::uint64_t> seed;
  bool hypotheses_only = false;
};

struct Artifact {
  std::string name;  // relative path inside the output directory
  std::string content;
  bool complete = true;
  std::optional<double> time;  // snapshot time
};

struct RunResult {
  int exit_code = exit_code::ok;
  Json report = Json::object();
  std::vector<Artifact> artifacts;
};

// ---------------------------------------------------------------------------
// JSON rendering

inline Json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline Json to_json(const Witness& w) {
  Json j = Json::object();
  Json values = Json::object();
  for (const auto& [k, v] : w.values) values[k] = json_number(v);
  j["values"] = values;
  if (!w.table.empty()) {
    Json rows = Json::array();
    for (const auto& r : w.table) {
      Json row = Json::array();
      for (double v : r) row.push_back(json_number(v));
      rows.push_back(row);
    }
    j["table"] = {{"columns", w.table_columns}, {"rows", rows}};
  }
  if (!w.notes.empty()) j["notes"] = w.notes;
  return j;
}

inline Json to_json(const ConditionRecord& c) {
  return {{"condition", c.name}, {"status", to_string(c.status)}, {"horizon", json_number(c.horizon)},
          {"witness", to_json(c.witness)}};
}

inline Json to_json(const HypothesisReport& r) {
  Json conds = Json::array();
  for (const auto& c : r.conditions) conds.push_back(to_json(c));
  Json j = {{"theorem", r.theorem}, {"status", to_string(r.overall())}, {"horizon", json_number(r.horizon())},
            {"conditions", conds}};
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline Json to_json(const DecayVerdict& v, double eps) {
  Json j = {{"status", to_string(v.status)},
            {"epsilon", eps},
            {"horizon", json_number(v.horizon)},
            {"last_window_sup", json_number(v.last_window_sup)}};
  Json inf = Json::array();
  for (double x : v.window_infima) inf.push_back(json_number(x));
  j["window_infima"] = inf;
  j["rate"] = v.rate ? json_number(*v.rate) : Json(nullptr);
  j["limit"] = v.limit ? json_number(*v.limit) : Json(nullptr);
  return j;
}

/// 64-bit FNV-1a as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash over the effective config; the output directory is not part of it.
inline std::string config_hash(const ScenarioConfig& cfg) {
  Json j = cfg.source;
  j.erase("out_dir");
  return fnv1a_hex(j.dump());
}

/// Applies the command-line overrides to the config document and re-validates it.
inline ScenarioConfig with_overrides(const ScenarioConfig& cfg, const RunOptions& opt) {
  Json j = cfg.source;
  if (opt.t_end) {
    if (!(*opt.t_end > 0.0)) throw ConfigError("--t-end must be positive");
    if (cfg.kind == ScenarioKind::peano) j["peano"]["t_end"] = *opt.t_end;
    else j["solver"]["t_end"] = *opt.t_end;
  }
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) throw ConfigError("--tol must be positive");
    j["epsilon"] = *opt.tol;
  }
  if (opt.seed) j["seed"] = *opt.seed;
  ScenarioConfig out = parse_scenario(j, cfg.base_dir);
  out.catalog_case = cfg.catalog_case;
  return out;
}

namespace detail {

struct RunState {
  const ScenarioConfig& cfg;
  std::vector<HypothesisReport> reports;
  std::optional<DecayVerdict> verdict;
  std::vector<Artifact> artifacts;
  std::string abort_reason;
};

inline void add_trajectory(RunState& st, const std::string& name, const Trajectory& traj) {
  st.artifacts.push_back({name, to_csv(traj, false), traj.complete, std::nullopt});
  if (!traj.complete && st.abort_reason.empty()) {
    auto it = traj.metadata.find("incomplete_reason");
    st.abort_reason = name + ": " + (it != traj.metadata.end() ? it->second : std::string("run aborted"));
  }
}

inline bool wants(const ScenarioConfig& cfg, const std::string& id) {
  return std::find(cfg.theorems.begin(), cfg.theorems.end(), id) != cfg.theorems.end();
}

inline ConditionRecord verdict_condition(std::string name, const DecayVerdict& v, double horizon) {
  ConditionRecord rec{std::move(name), Status::inconclusive, {}, horizon};
  rec.status = v.status == DecayStatus::decays ? Status::pass
               : v.status == DecayStatus::no_decay ? Status::fail
                                                   : Status::inconclusive;
  rec.witness.values["last_window_sup"] = v.last_window_sup;
  rec.witness.notes.push_back(std::string("decay verdict: ") + to_string(v.status));
  return rec;
}

inline void run_surrogate(RunState& st, const TheoremInputs& in) {
  const ScenarioConfig& cfg = st.cfg;
  const double g0 = cfg.param("g0").value_or(1.0);
  Trajectory traj = solve_surrogate(*in.a, *in.f_state, *in.b, g0, cfg.solver);
  add_trajectory(st, "trajectory.csv", traj);
  if (!traj.complete) return;
  st.verdict = decay_verdict(traj, cfg.epsilon);

  if (wants(cfg, "thm-2-13")) {
    HypothesisReport pipe;
    pipe.theorem = "thm-2-13-pipeline";
    const double T = traj.end_time();
    const auto map = reparameterize(*in.a, T, 1e-12);

    ConditionRecord rt{"clock_roundtrip", Status::pass, {}, T};
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> pick(0.0, T);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double t = pick(rng);
      worst = std::max(worst, std::abs(map.inverse(map.forward(t)) - t));
    }
    rt.witness.values["max_roundtrip_error"] = worst;
    rt.witness.values["samples"] = 100;
    rt.witness.values["s_end"] = map.s_end();
    rt.status = worst <= 1e-9 ? Status::pass : Status::fail;
    pipe.add(rt);

    const Trajectory w = transform_trajectory(traj, map, 4001);
    add_trajectory(st, "w_trajectory.csv", w);
    const auto& a = *in.a;
    const auto& b = *in.b;
    auto beta = [&](double s) {
      const double t = map.inverse(s);
      return b(t) / a(t);
    };
    const auto inc = increment_bound_check(w, beta, 200, cfg.seed);
    ConditionRecord ib{"increment_bound", inc.passed() ? Status::pass : Status::fail, {}, w.end_time()};
    ib.witness.values["pairs"] = static_cast<double>(inc.pairs);
    ib.witness.values["violations"] = static_cast<double>(inc.violations);
    ib.witness.values["worst_margin"] = inc.worst_margin;
    ib.witness.values["tol"] = inc.tol;
    pipe.add(ib);
    pipe.add(verdict_condition("w_decays", decay_verdict(w, cfg.epsilon), w.end_time()));
    st.reports.push_back(std::move(pipe));
  }

  if (auto om = cfg.functions.find("omega"); om != cfg.functions.end() && in.phi) {
    const auto omega = parse_univariate(om->second, cfg.base_dir);
    HypothesisReport rep;
    rep.theorem = "integral-certificate";
    const TailVerdict v = integral_certificate(traj, omega, *in.phi, cfg.check.tail_tol);
    rep.add({"omega_y_phi_integrable", detail::tail_status(v, true), detail::tail_witness(v), v.horizon});
    st.reports.push_back(std::move(rep));
  }
}

inline std::vector<double> initial_state(const ScenarioConfig& cfg) {
  if (cfg.pde.u0.type == "zero") return std::vector<double>(cfg.grid.n, 0.0);
  return sine_profile(cfg.grid, cfg.pde.u0.mode, cfg.pde.u0.amplitude);
}

inline void run_pde(RunState& st, const TheoremInputs& in) {
  const ScenarioConfig& cfg = st.cfg;
  const Grid1D& grid = cfg.grid;
  PDEScenario sc;
  sc.gamma = *in.gamma;
  sc.amplitude = *in.beta;
  sc.profile = normalized(sine_profile(grid, cfg.pde.profile_mode, 1.0), grid.spacing());
  sc.h = cfg.pde.nonlinearity;
  sc.u0 = initial_state(cfg);
  sc.k = cfg.param("k");
  PDEConfig pc;
  pc.dt = cfg.solver.dt;
  pc.t_end = cfg.solver.t_end;
  pc.snapshot_times = cfg.pde.snapshot_times;
  pc.max_records = cfg.solver.max_records;
  pc.residual_tol = cfg.pde.residual_tol;

  const SimulationResult res = simulate(sc, grid, pc);
  add_trajectory(st, "trajectory.csv", res.norm);
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    const Snapshot& s = res.snapshots[k];
    std::ostringstream os;
    os << "x,u\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << format_double(s.x[i]) << ',' << format_double(s.u[i]) << '\n';
    st.artifacts.push_back({"snapshots/snapshot_" + std::to_string(k) + ".csv", os.str(), true, s.time});
  }
  if (!res.complete) return;

  HypothesisReport checks;
  checks.theorem = "pde-checks";
  const double T = res.norm.end_time();

  const auto pairs = random_state_pairs(grid.n, cfg.pde.probe_pairs, -cfg.pde.probe_range, cfg.pde.probe_range, cfg.seed);
  const auto probe = dissipativity_probe(sc, grid, pairs, {0.0, 0.5 * T, T});
  ConditionRecord dp{"dissipativity_probe", probe.passed() ? Status::pass : Status::fail, {}, T};
  dp.witness.values["samples"] = static_cast<double>(probe.samples);
  dp.witness.values["violations"] = static_cast<double>(probe.violations);
  dp.witness.values["worst_margin"] = probe.worst_margin;
  dp.witness.values["lambda1"] = res.lambda1;
  checks.add(dp);

  ConditionRecord nr{"norm_inequality_residual", res.residual_violations == 0 ? Status::pass : Status::fail, {}, T};
  nr.witness.values["max_residual"] = res.max_norm_residual;
  nr.witness.values["violations"] = static_cast<double>(res.residual_violations);
  nr.witness.values["tol"] = cfg.pde.residual_tol;
  checks.add(nr);

  // ||u(t)|| <= ||u0|| exp(-lambda1 Gamma(t)) + B(t)
  const std::vector<double> times = res.norm.times();
  AprioriBound bound = apriori_bound(sc.gamma, sc.amplitude, res.lambda1, times);
  const double u0_norm = l2_norm(sc.u0, grid.spacing());
  Trajectory total(1);
  total.columns = {"bound"};
  double Gamma = 0.0, worst = -std::numeric_limits<double>::infinity(), sup_norm = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) Gamma += integrate(sc.gamma, times[i - 1], times[i], 1e-11);
    const double bt = u0_norm * std::exp(-res.lambda1 * Gamma) + bound.curve.value(i);
    total.push(times[i], bt);
    worst = std::max(worst, res.norm.value(i) - bt);
    sup_norm = std::max(sup_norm, res.norm.value(i));
  }
  add_trajectory(st, "bound.csv", total);
  ConditionRecord ab{"apriori_bound_respected", worst <= cfg.pde.bound_tol ? Status::pass : Status::fail, {}, T};
  ab.witness.values["max_norm_minus_bound"] = worst;
  ab.witness.values["tol"] = cfg.pde.bound_tol;
  checks.add(ab);

  ConditionRecord sb{"sup_norm_bound", Status::inconclusive, {}, T};
  sb.witness.values["sup_norm"] = sup_norm;
  sb.witness.values["sup_bound_curve"] = bound.sup_curve;
  sb.witness.notes.push_back(bound.sup_bound_note);
  if (bound.sup_bound && u0_norm == 0.0) {
    sb.witness.values["sup_bound"] = *bound.sup_bound;
    sb.status = sup_norm <= *bound.sup_bound + cfg.pde.bound_tol ? Status::pass : Status::fail;
  } else if (u0_norm != 0.0) {
    sb.witness.notes.push_back("closed-form supremum applies to u0 = 0 only");
  }
  if (auto k = cfg.param("k"); k && *k > 1.0) sb.witness.values["one_over_k_minus_1"] = 1.0 / (*k - 1.0);
  checks.add(sb);
  st.reports.push_back(std::move(checks));

  st.verdict = decay_verdict(res.norm, cfg.epsilon);
}

inline void run_peano(RunState& st) {
  const ScenarioConfig& cfg = st.cfg;
  const PeanoSection& p = cfg.peano;
  const std::size_t dim = p.u0.size();
  auto A = [&](double, const State& u) {
    State out(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) out[i] += p.matrix[i][j] * u[j];
    return out;
  };
  auto forcing = [&](double) { return p.forcing.empty() ? State(dim, 0.0) : p.forcing; };
  auto field = [&](double t, const State& u) {
    State out = A(t, u);
    const State f = forcing(t);
    for (std::size_t i = 0; i < dim; ++i) out[i] += f[i];
    return out;
  };
  SolverConfig rc;
  rc.dt = p.dt;
  rc.t_end = p.t_end;
  const Trajectory ref = solve_system(field, p.u0, rc);
  add_trajectory(st, "reference.csv", ref);
  const auto iterates = peano_iterates(A, forcing, p.u0, p.n_list, p.t_end, p.dt);

  HypothesisReport rep;
  rep.theorem = "peano-convergence";
  ConditionRecord rec{"error_halving", Status::pass, {}, p.t_end};
  rec.witness.table_columns = {"n", "sup_error", "ratio_to_half_n"};
  std::vector<double> errs;
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    add_trajectory(st, "peano_n" + std::to_string(p.n_list[k]) + ".csv", iterates[k]);
    errs.push_back(sup_distance(iterates[k], ref));
  }
  int compared = 0;
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    double ratio = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t m = 0; m < iterates.size(); ++m)
      if (p.n_list[m] * 2 == p.n_list[k] && errs[m] > 0.0) {
        ratio = errs[k] / errs[m];
        ++compared;
        if (!(ratio <= p.max_ratio)) rec.status = Status::fail;
      }
    rec.witness.table.push_back({static_cast<double>(p.n_list[k]), errs[k], ratio});
    rec.witness.values["sup_error[n=" + std::to_string(p.n_list[k]) + "]"] = errs[k];
  }
  rec.witness.values["max_ratio"] = p.max_ratio;
  if (compared == 0) {
    rec.status = Status::inconclusive;
    rec.witness.notes.push_back("n_list has no (n, 2n) pairs");
  }
  rep.add(rec);
  st.reports.push_back(std::move(rep));
}

struct Expectation {
  std::string target, expected, actual;
  enum class Outcome { met, violated, inconclusive } outcome;
};

inline const char* outcome_name(Expectation::Outcome o) {
  switch (o) {
    case Expectation::Outcome::met: return "met";
    case Expectation::Outcome::violated: return "violated";
    case Expectation::Outcome::inconclusive: return "inconclusive";
  }
  return "?";
}

inline Expectation compare_status(std::string target, Status expected, std::optional<Status> actual) {
  Expectation e{std::move(target), to_string(expected), actual ? to_string(*actual) : "missing",
                Expectation::Outcome::violated};
  if (actual && *actual == expected) e.outcome = Expectation::Outcome::met;
  else if (actual && *actual == Status::inconclusive) e.outcome = Expectation::Outcome::inconclusive;
  return e;
}

inline std::vector<Expectation> evaluate_expectations(const RunState& st) {
  const Expectations& ex = st.cfg.expect;
  std::vector<Expectation> out;
  for (const auto& r : st.reports) {
    auto it = ex.reports.find(r.theorem);
    out.push_back(compare_status("report:" + r.theorem, it != ex.reports.end() ? it->second : Status::pass, r.overall()));
  }
  for (const auto& [id, want] : ex.reports) {
    const bool seen = std::any_of(st.reports.begin(), st.reports.end(), [&](const auto& r) { return r.theorem == id; });
    if (!seen) out.push_back(compare_status("report:" + id, want, std::nullopt));
  }
  for (const auto& [key, want] : ex.conditions) {
    std::optional<Status> actual;
    const auto slash = key.find('/');
    if (slash != std::string::npos)
      for (const auto& r : st.reports)
        if (r.theorem == key.substr(0, slash))
          if (const auto* c = r.find(key.substr(slash + 1))) actual = c->status;
    out.push_back(compare_status("condition:" + key, want, actual));
  }
  if (st.verdict || ex.verdict) {
    const DecayStatus want = ex.verdict.value_or(DecayStatus::decays);
    Expectation e{"verdict", to_string(want), st.verdict ? to_string(st.verdict->status) : "missing",
                  Expectation::Outcome::violated};
    if (st.verdict && st.verdict->status == want) e.outcome = Expectation::Outcome::met;
    else if (st.verdict && st.verdict->status == DecayStatus::inconclusive) e.outcome = Expectation::Outcome::inconclusive;
    out.push_back(e);
  }
  if (ex.floor) {
    Expectation e{"floor", format_double(*ex.floor) + " +- " + format_double(ex.floor_tol), "missing",
                  Expectation::Outcome::violated};
    if (st.verdict && st.verdict->limit) {
      e.actual = format_double(*st.verdict->limit);
      if (std::abs(*st.verdict->limit - *ex.floor) <= ex.floor_tol) e.outcome = Expectation::Outcome::met;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace detail

/// Runs the declared pipeline (hypotheses, then solve, then verdict) and builds the report.
/// Config problems throw ConfigError/LookupError; numerical aborts are reported with exit code 1.
inline RunResult run_scenario(const ScenarioConfig& given, const RunOptions& opt = {}) {
  const ScenarioConfig cfg = with_overrides(resolve_catalog(given), opt);
  detail::RunState st{cfg, {}, std::nullopt, {}, {}};
  const TheoremInputs in = resolve_inputs(cfg);

  try {
    st.reports = applicable_theorems(in, cfg.check, cfg.theorems);
    if (!opt.hypotheses_only) {
      switch (cfg.kind) {
        case ScenarioKind::surrogate: detail::run_surrogate(st, in); break;
        case ScenarioKind::pde: detail::run_pde(st, in); break;
        case ScenarioKind::peano: detail::run_peano(st); break;
        default: break;
      }
    }
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  } catch (const NumericError& e) {
    st.abort_reason = e.what();
  } catch (const DomainError& e) {
    st.abort_reason = e.what();
  }

  RunResult out;
  Json& rep = out.report;
  Json scenario = {{"id", cfg.id},
                   {"kind", to_string(cfg.kind)},
                   {"config_hash", config_hash(cfg)},
                   {"seed", cfg.seed},
                   {"hypotheses_only", opt.hypotheses_only}};
  if (!cfg.catalog_case.empty()) scenario["catalog_case"] = cfg.catalog_case;
  if (!cfg.description.empty()) scenario["description"] = cfg.description;
  rep["scenario"] = scenario;

  Json reports = Json::array();
  for (const auto& r : st.reports) reports.push_back(to_json(r));
  rep["reports"] = reports;
  rep["verdict"] = st.verdict ? to_json(*st.verdict, cfg.epsilon) : Json(nullptr);

  // every finite-horizon certificate, in one place
  Json horizons = Json::object();
  for (const auto& r : st.reports)
    for (const auto& c : r.conditions) horizons[r.theorem + "/" + c.name] = json_number(c.horizon);
  if (st.verdict) horizons["verdict"] = json_number(st.verdict->horizon);
  rep["horizons"] = horizons;

  const auto expectations = detail::evaluate_expectations(st);
  Json ej = Json::array();
  bool violated = !st.abort_reason.empty(), inconclusive = false;
  for (const auto& e : expectations) {
    ej.push_back({{"target", e.target},
                  {"expected", e.expected},
                  {"actual", e.actual},
                  {"outcome", detail::outcome_name(e.outcome)}});
    violated = violated || e.outcome == detail::Expectation::Outcome::violated;
    inconclusive = inconclusive || e.outcome == detail::Expectation::Outcome::inconclusive;
  }
  rep["expectations"] = ej;
  rep["expectations_source"] = cfg.expect.present ? "config" : "implicit";

  Json arts = Json::array();
  for (const auto& a : st.artifacts) {
    Json aj = {{"file", a.name}, {"complete", a.complete}};
    if (a.time) aj["time"] = *a.time;
    arts.push_back(aj);
  }
  rep["artifacts"] = arts;
  rep["complete"] = st.abort_reason.empty();
  rep["abort_reason"] = st.abort_reason.empty() ? Json(nullptr) : Json(st.abort_reason);

  out.exit_code = violated ? exit_code::violated : inconclusive ? exit_code::inconclusive : exit_code::ok;
  rep["exit_code"] = out.exit_code;
  out.artifacts = std::move(st.artifacts);
  return out;
}

inline std::string render_report(const RunResult& r) { return r.report.dump(2) + "\n"; }

/// Writes the artifacts and report.json below out_dir; failures surface as ConfigError (exit 3).
inline std::vector<std::filesystem::path> emit_outputs(const RunResult& r, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  auto write = [&](const fs::path& rel, const std::string& content) {
    const fs::path p = out_dir / rel;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw ConfigError("cannot create output directory " + p.parent_path().string() + ": " + ec.message());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + p.string());
    f << content;
    f.close();
    if (!f) throw ConfigError("cannot write " + p.string());
    written.push_back(p);
  };
  for (const auto& a : r.artifacts) write(a.name, a.content);
  write("report.json", render_report(r));
  return written;
}

}  // namespace decaykit
