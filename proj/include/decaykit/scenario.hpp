#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decaykit/bivariate.hpp"
#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/hypothesis.hpp"
#include "decaykit/odesolve.hpp"
#include "decaykit/pde.hpp"
#include "decaykit/verdict.hpp"

namespace decaykit {

using Json = nlohmann::json;

enum class ScenarioKind { surrogate, pde, peano, check_only, catalog };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::surrogate: return "surrogate";
    case ScenarioKind::pde: return "pde";
    case ScenarioKind::peano: return "peano";
    case ScenarioKind::check_only: return "check-only";
    case ScenarioKind::catalog: return "catalog";
  }
  return "?";
}

inline ScenarioKind parse_kind(const std::string& s) {
  if (s == "surrogate") return ScenarioKind::surrogate;
  if (s == "pde") return ScenarioKind::pde;
  if (s == "peano") return ScenarioKind::peano;
  if (s == "check-only") return ScenarioKind::check_only;
  if (s == "catalog") return ScenarioKind::catalog;
  throw ConfigError("field 'kind': unknown scenario kind '" + s + "'");
}

struct InitialState {
  std::string type = "zero";  // zero | sine
  double amplitude = 1.0;
  int mode = 1;
};

struct PdeSection {
  Nonlinearity nonlinearity = Nonlinearity::none();
  int profile_mode = 1;  // forcing profile: normalized sin(mode x)
  InitialState u0;
  std::vector<double> snapshot_times;
  std::size_t probe_pairs = 200;
  double probe_range = 2.0;
  double residual_tol = 1e-6;
  double bound_tol = 1e-3;
};

struct PeanoSection {
  std::vector<std::vector<double>> matrix{{-1.0}};
  std::vector<double> forcing;  // constant forcing vector, empty = 0
  std::vector<double> u0{1.0};
  std::vector<int> n_list{8, 16, 32, 64};
  double t_end = 2.0;
  double dt = 1e-3;
  double max_ratio = 0.75;
};

struct Expectations {
  bool present = false;
  std::map<std::string, Status> reports;     // theorem id -> overall status
  std::map<std::string, Status> conditions;  // "theorem/condition" -> status
  std::optional<DecayStatus> verdict;
  std::optional<double> floor;
  double floor_tol = 1e-3;
};

/// Declarative scenario description; `canonical` is the normalized JSON the config hash is taken over.
struct ScenarioConfig {
  std::string id = "scenario";
  ScenarioKind kind = ScenarioKind::check_only;
  std::string catalog_case;
  std::string description;
  std::map<std::string, std::string> functions;
  std::string bivariate;
  std::optional<std::vector<std::string>> separable;  // g, phi, h descriptors
  std::vector<double> levels;
  double F_step = 0.1;
  double F_horizon = 200.0;
  std::map<std::string, double> parameters;
  std::vector<std::string> theorems;
  SolverConfig solver;
  Grid1D grid;
  PdeSection pde;
  PeanoSection peano;
  CheckConfig check;
  double epsilon = 1e-3;
  std::uint64_t seed = 42;
  std::string out_dir;
  Expectations expect;
  std::filesystem::path base_dir;
  Json source = Json::object();  // the config as given (catalog override merging works on this)

  std::optional<double> param(const std::string& k) const {
    auto it = parameters.find(k);
    if (it == parameters.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

inline std::string field_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

inline void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("field '" + where + "': expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError("field '" + field_path(where, it.key()) + "': unknown key");
}

inline double get_number(const Json& obj, const std::string& where, const char* key, double def) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("field '" + field_path(where, key) + "': expected a number");
  return v.get<double>();
}

inline std::string get_string(const Json& obj, const std::string& where, const char* key, const std::string& def) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("field '" + field_path(where, key) + "': expected a string");
  return v.get<std::string>();
}

inline std::vector<double> get_numbers(const Json& obj, const std::string& where, const char* key,
                                       std::vector<double> def) {
  if (!obj.contains(key)) return def;
  const Json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("field '" + field_path(where, key) + "': expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError("field '" + field_path(where, key) + "': expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline void parse_check(const Json& j, CheckConfig& c) {
  const std::string w = "check";
  reject_unknown(j, w, {"horizon", "s_min", "deltas", "subhorizons", "pair_s", "pair_gap", "window_samples",
                        "trend_windows", "stability_tol", "growth_tol", "ratio_zero_tol", "tail_tol",
                        "divergence_bound", "tail_max_horizon", "zeta_resolution", "state_horizon"});
  c.horizon = get_number(j, w, "horizon", c.horizon);
  c.s_min = get_number(j, w, "s_min", c.s_min);
  c.deltas = get_numbers(j, w, "deltas", c.deltas);
  c.subhorizons = static_cast<int>(get_number(j, w, "subhorizons", c.subhorizons));
  c.pair_s = static_cast<int>(get_number(j, w, "pair_s", c.pair_s));
  c.pair_gap = static_cast<int>(get_number(j, w, "pair_gap", c.pair_gap));
  c.window_samples = static_cast<int>(get_number(j, w, "window_samples", c.window_samples));
  c.trend_windows = static_cast<int>(get_number(j, w, "trend_windows", c.trend_windows));
  c.stability_tol = get_number(j, w, "stability_tol", c.stability_tol);
  c.growth_tol = get_number(j, w, "growth_tol", c.growth_tol);
  c.ratio_zero_tol = get_number(j, w, "ratio_zero_tol", c.ratio_zero_tol);
  c.tail_tol = get_number(j, w, "tail_tol", c.tail_tol);
  c.tail.divergence_bound = get_number(j, w, "divergence_bound", c.tail.divergence_bound);
  c.tail.max_horizon = get_number(j, w, "tail_max_horizon", c.tail.max_horizon);
  c.zeta_resolution = static_cast<std::size_t>(get_number(j, w, "zeta_resolution", static_cast<double>(c.zeta_resolution)));
  c.state_horizon = get_number(j, w, "state_horizon", c.state_horizon);
  c.validate();
}

inline void parse_expect(const Json& j, Expectations& e) {
  reject_unknown(j, "expect", {"reports", "conditions", "verdict", "floor", "floor_tol"});
  e.present = true;
  auto statuses = [&](const char* key, std::map<std::string, Status>& out) {
    if (!j.contains(key)) return;
    const Json& m = j.at(key);
    if (!m.is_object()) throw ConfigError(std::string("field 'expect.") + key + "': expected an object");
    for (auto it = m.begin(); it != m.end(); ++it) {
      if (!it.value().is_string())
        throw ConfigError(std::string("field 'expect.") + key + "." + it.key() + "': expected a status string");
      try {
        out[it.key()] = parse_status(it.value().get<std::string>());
      } catch (const ConfigError& err) {
        throw ConfigError(std::string("field 'expect.") + key + "." + it.key() + "': " + err.what());
      }
    }
  };
  statuses("reports", e.reports);
  statuses("conditions", e.conditions);
  if (j.contains("verdict")) {
    try {
      e.verdict = parse_decay_status(get_string(j, "expect", "verdict", ""));
    } catch (const ConfigError& err) {
      throw ConfigError(std::string("field 'expect.verdict': ") + err.what());
    }
  }
  if (j.contains("floor")) e.floor = get_number(j, "expect", "floor", 0.0);
  e.floor_tol = get_number(j, "expect", "floor_tol", e.floor_tol);
}

}  // namespace detail

/// Validates and types a scenario document. Errors name the offending field.
inline ScenarioConfig parse_scenario(const Json& j, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  reject_unknown(j, "", {"id", "kind", "case", "description", "functions", "bivariate", "separable", "levels",
                         "F_step", "F_horizon", "parameters", "theorems", "solver", "grid", "pde", "peano", "check",
                         "epsilon", "seed", "out_dir", "expect"});
  ScenarioConfig c;
  c.source = j;
  c.base_dir = base_dir;
  if (!j.contains("kind")) throw ConfigError("field 'kind': required");
  c.kind = parse_kind(get_string(j, "", "kind", ""));
  c.id = get_string(j, "", "id", c.id);
  c.description = get_string(j, "", "description", "");
  c.catalog_case = get_string(j, "", "case", "");
  if (c.kind == ScenarioKind::catalog && c.catalog_case.empty()) throw ConfigError("field 'case': required for kind=catalog");

  if (j.contains("functions")) {
    const Json& fj = j.at("functions");
    reject_unknown(fj, "functions", {"a", "b", "f", "gamma", "beta", "forcing", "phi", "h", "omega"});
    for (auto it = fj.begin(); it != fj.end(); ++it) {
      if (!it.value().is_string()) throw ConfigError("field 'functions." + it.key() + "': expected a descriptor string");
      c.functions[it.key()] = it.value().get<std::string>();
    }
  }
  c.bivariate = get_string(j, "", "bivariate", "");
  if (j.contains("separable")) {
    const Json& sj = j.at("separable");
    reject_unknown(sj, "separable", {"g", "phi", "h"});
    c.separable = std::vector<std::string>{get_string(sj, "separable", "g", "constant(1)"),
                                           get_string(sj, "separable", "phi", "constant(0)"),
                                           get_string(sj, "separable", "h", "constant(0)")};
  }
  c.levels = get_numbers(j, "", "levels", {});
  c.F_step = get_number(j, "", "F_step", c.F_step);
  c.F_horizon = get_number(j, "", "F_horizon", c.F_horizon);
  if (j.contains("parameters")) {
    const Json& pj = j.at("parameters");
    reject_unknown(pj, "parameters", {"C", "alpha", "a_bound", "k", "g0", "theta"});
    for (auto it = pj.begin(); it != pj.end(); ++it) c.parameters[it.key()] = get_number(pj, "parameters", it.key().c_str(), 0.0);
  }
  if (j.contains("theorems")) {
    const Json& tj = j.at("theorems");
    if (!tj.is_array()) throw ConfigError("field 'theorems': expected an array of theorem ids");
    for (const auto& t : tj) {
      if (!t.is_string()) throw ConfigError("field 'theorems': expected an array of theorem ids");
      c.theorems.push_back(t.get<std::string>());
    }
  }
  if (j.contains("solver")) {
    const Json& sj = j.at("solver");
    reject_unknown(sj, "solver", {"dt", "t_end", "scheme", "max_steps", "max_records", "halve_on_tolerance"});
    c.solver.dt = get_number(sj, "solver", "dt", c.solver.dt);
    c.solver.t_end = get_number(sj, "solver", "t_end", c.solver.t_end);
    const std::string scheme = get_string(sj, "solver", "scheme", "rk4");
    if (scheme == "rk4") c.solver.scheme = Scheme::rk4;
    else if (scheme == "semi_implicit") c.solver.scheme = Scheme::semi_implicit;
    else throw ConfigError("field 'solver.scheme': expected rk4 or semi_implicit");
    c.solver.max_steps = static_cast<std::size_t>(get_number(sj, "solver", "max_steps", static_cast<double>(c.solver.max_steps)));
    c.solver.max_records = static_cast<std::size_t>(get_number(sj, "solver", "max_records", static_cast<double>(c.solver.max_records)));
    if (sj.contains("halve_on_tolerance")) {
      if (!sj.at("halve_on_tolerance").is_boolean()) throw ConfigError("field 'solver.halve_on_tolerance': expected a boolean");
      c.solver.halve_on_tolerance = sj.at("halve_on_tolerance").get<bool>();
    }
  }
  if (j.contains("grid")) {
    const Json& gj = j.at("grid");
    reject_unknown(gj, "grid", {"n", "length"});
    c.grid.n = static_cast<std::size_t>(get_number(gj, "grid", "n", static_cast<double>(c.grid.n)));
    c.grid.length = get_number(gj, "grid", "length", c.grid.length);
  }
  if (j.contains("pde")) {
    const Json& pj = j.at("pde");
    reject_unknown(pj, "pde", {"nonlinearity", "p", "profile_mode", "u0", "snapshot_times", "probe_pairs", "probe_range",
                               "residual_tol", "bound_tol"});
    const std::string nl = get_string(pj, "pde", "nonlinearity", "none");
    if (nl == "none") c.pde.nonlinearity = Nonlinearity::none();
    else if (nl == "cubic") c.pde.nonlinearity = Nonlinearity::cubic();
    else if (nl == "power") c.pde.nonlinearity = Nonlinearity::power(get_number(pj, "pde", "p", 3.0));
    else throw ConfigError("field 'pde.nonlinearity': expected none, cubic or power");
    c.pde.profile_mode = static_cast<int>(get_number(pj, "pde", "profile_mode", 1));
    if (pj.contains("u0")) {
      const Json& uj = pj.at("u0");
      reject_unknown(uj, "pde.u0", {"type", "amplitude", "mode"});
      c.pde.u0.type = get_string(uj, "pde.u0", "type", "zero");
      if (c.pde.u0.type != "zero" && c.pde.u0.type != "sine") throw ConfigError("field 'pde.u0.type': expected zero or sine");
      c.pde.u0.amplitude = get_number(uj, "pde.u0", "amplitude", 1.0);
      c.pde.u0.mode = static_cast<int>(get_number(uj, "pde.u0", "mode", 1));
    }
    c.pde.snapshot_times = get_numbers(pj, "pde", "snapshot_times", {});
    c.pde.probe_pairs = static_cast<std::size_t>(get_number(pj, "pde", "probe_pairs", 200));
    c.pde.probe_range = get_number(pj, "pde", "probe_range", 2.0);
    c.pde.residual_tol = get_number(pj, "pde", "residual_tol", c.pde.residual_tol);
    c.pde.bound_tol = get_number(pj, "pde", "bound_tol", c.pde.bound_tol);
  }
  if (j.contains("peano")) {
    const Json& pj = j.at("peano");
    reject_unknown(pj, "peano", {"matrix", "forcing", "u0", "n_list", "t_end", "dt", "max_ratio"});
    if (pj.contains("matrix")) {
      c.peano.matrix.clear();
      const Json& mj = pj.at("matrix");
      if (!mj.is_array() || mj.empty()) throw ConfigError("field 'peano.matrix': expected a non-empty array of rows");
      for (const auto& row : mj) {
        if (!row.is_array()) throw ConfigError("field 'peano.matrix': expected an array of rows");
        std::vector<double> r;
        for (const auto& v : row) {
          if (!v.is_number()) throw ConfigError("field 'peano.matrix': entries must be numbers");
          r.push_back(v.get<double>());
        }
        c.peano.matrix.push_back(std::move(r));
      }
    }
    c.peano.forcing = get_numbers(pj, "peano", "forcing", {});
    c.peano.u0 = get_numbers(pj, "peano", "u0", c.peano.u0);
    if (pj.contains("n_list")) {
      c.peano.n_list.clear();
      for (double v : get_numbers(pj, "peano", "n_list", {})) c.peano.n_list.push_back(static_cast<int>(v));
    }
    c.peano.t_end = get_number(pj, "peano", "t_end", c.peano.t_end);
    c.peano.dt = get_number(pj, "peano", "dt", c.peano.dt);
    c.peano.max_ratio = get_number(pj, "peano", "max_ratio", c.peano.max_ratio);
    const std::size_t dim = c.peano.u0.size();
    if (c.peano.matrix.size() != dim) throw ConfigError("field 'peano.matrix': must be square with the size of peano.u0");
    for (const auto& r : c.peano.matrix)
      if (r.size() != dim) throw ConfigError("field 'peano.matrix': must be square with the size of peano.u0");
    if (!c.peano.forcing.empty() && c.peano.forcing.size() != dim)
      throw ConfigError("field 'peano.forcing': must match the size of peano.u0");
  }
  if (j.contains("check")) detail::parse_check(j.at("check"), c.check);
  c.epsilon = get_number(j, "", "epsilon", c.epsilon);
  if (!(c.epsilon > 0.0)) throw ConfigError("field 'epsilon': must be positive");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("field 'seed': expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.out_dir = get_string(j, "", "out_dir", "");
  if (j.contains("expect")) parse_expect(j.at("expect"), c.expect);

  // kind-specific requirements
  auto need = [&](const char* fn) {
    if (!c.functions.count(fn))
      throw ConfigError(std::string("field 'functions.") + fn + "': required for kind=" + to_string(c.kind));
  };
  switch (c.kind) {
    case ScenarioKind::surrogate:
      need("a"), need("b"), need("f");
      break;
    case ScenarioKind::pde:
      need("gamma");
      break;
    default: break;
  }
  if (!(c.solver.t_end > 0.0) || !(c.solver.dt > 0.0)) throw ConfigError("field 'solver': dt and t_end must be positive");
  if (c.kind == ScenarioKind::pde) c.grid.validate();
  return c;
}

inline ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": malformed JSON: " + e.what());
  }
  return parse_scenario(j, path.parent_path());
}

/// Functions and parameters resolved from the scenario's descriptors.
inline TheoremInputs resolve_inputs(const ScenarioConfig& c) {
  TheoremInputs in;
  auto fn = [&](const char* key) -> std::optional<UnivariateFn> {
    auto it = c.functions.find(key);
    if (it == c.functions.end()) return std::nullopt;
    try {
      return parse_univariate(it->second, c.base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("field 'functions.") + key + "': " + e.what());
    }
  };
  in.a = fn("a");
  in.b = fn("b");
  in.f_state = fn("f");
  in.gamma = fn("gamma");
  in.beta = fn("beta");
  if (!in.beta && c.kind == ScenarioKind::pde && in.gamma)
    in.beta = fn("forcing") ? fn("forcing") : std::optional<UnivariateFn>(UnivariateFn::constant(0.0));
  in.phi = fn("phi");
  in.h = fn("h");
  try {
    if (!c.bivariate.empty()) in.f_bivariate = BivariateFn::analytic(c.bivariate);
    else if (c.separable)
      in.f_bivariate = BivariateFn::separable(parse_univariate((*c.separable)[0], c.base_dir),
                                              parse_univariate((*c.separable)[1], c.base_dir),
                                              parse_univariate((*c.separable)[2], c.base_dir));
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("field 'bivariate': ") + e.what());
  }
  in.levels = c.levels;
  in.F_step = c.F_step;
  in.F_horizon = c.F_horizon;
  in.C = c.param("C");
  in.alpha = c.param("alpha");
  in.a_bound = c.param("a_bound");
  return in;
}

}  // namespace decaykit
