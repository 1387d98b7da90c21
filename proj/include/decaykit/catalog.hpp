#pragma once

#include <string>
#include <vector>

#include "decaykit/errors.hpp"
#include "decaykit/scenario.hpp"

namespace decaykit {

/// A built-in scenario together with the outcomes it is expected to produce (in its `expect` block).
struct CatalogCase {
  std::string id;
  std::string description;
  ScenarioConfig scenario;
};

namespace detail {

struct CatalogEntry {
  const char* id;
  const char* description;
  const char* config;
};

inline const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries{
      {"remark-2-2", "majorant F(t,v) is uniformly continuous for v=1 but not for v=2",
       R"json({
  "kind": "check-only",
  "bivariate": "piecewise_y(1, 1, 1 + (y-1)*x)",
  "levels": [1, 2],
  "F_step": 0.1,
  "F_horizon": 200,
  "theorems": ["thm-2-1"],
  "expect": {"reports": {"thm-2-1@v=1": "pass", "thm-2-1@v=2": "fail"}}
})json"},
      {"alpha-gt-1", "phi=(1+t)^-1.5 breaks the regularity limit t - C/phi(t) -> inf",
       R"json({
  "kind": "check-only",
  "functions": {"phi": "power_law(1, 1.5, 1)"},
  "parameters": {"C": 0.5},
  "theorems": ["thm-2-4"],
  "expect": {
    "reports": {"thm-2-4": "fail"},
    "conditions": {"thm-2-4/t_minus_C_over_phi_diverges": "fail"}
  }
})json"},
      {"alpha-le-1", "phi=(1+t)^-0.5 satisfies the regularity profile with C=1/2",
       R"json({
  "kind": "check-only",
  "functions": {"phi": "power_law(1, 0.5, 1)"},
  "parameters": {"C": 0.5},
  "theorems": ["thm-2-4"],
  "expect": {"reports": {"thm-2-4": "pass"}}
})json"},
      {"thm-2-11-pass", "a=(1+t)^-1/2, b=(1+t)^-2, f(g)=g: hypotheses hold and g decays",
       R"json({
  "kind": "surrogate",
  "functions": {"a": "power_law(1, 0.5, 1)", "b": "power_law(1, 2, 1)", "f": "monomial(1, 1)"},
  "parameters": {"g0": 1},
  "theorems": ["thm-2-11"],
  "solver": {"dt": 0.01, "t_end": 10000},
  "epsilon": 0.05,
  "expect": {"reports": {"thm-2-11": "pass"}, "verdict": "decays"}
})json"},
      {"thm-2-11-divergence-fail", "a=e^-t has a finite integral: g settles at e^-1 instead of 0",
       R"json({
  "kind": "surrogate",
  "functions": {"a": "exponential(1, 1)", "b": "constant(0)", "f": "monomial(1, 1)"},
  "parameters": {"g0": 1},
  "theorems": ["thm-2-11"],
  "solver": {"dt": 0.01, "t_end": 64},
  "epsilon": 0.001,
  "expect": {
    "reports": {"thm-2-11": "fail"},
    "conditions": {"thm-2-11/integral_a_diverges": "fail"},
    "verdict": "no_decay",
    "floor": 0.36787944117144233,
    "floor_tol": 0.001
  }
})json"},
      {"thm-2-13-pass", "same dynamics run through the s(t) clock change: w' <= -f(w) + b/a",
       R"json({
  "kind": "surrogate",
  "functions": {"a": "power_law(1, 0.5, 1)", "b": "power_law(1, 2, 1)", "f": "monomial(1, 1)"},
  "parameters": {"g0": 1},
  "theorems": ["thm-2-13"],
  "solver": {"dt": 0.01, "t_end": 10000},
  "epsilon": 0.05,
  "expect": {"reports": {"thm-2-13": "pass", "thm-2-13-pipeline": "pass"}, "verdict": "decays"}
})json"},
      {"pde-example", "u' = gamma(t)(u_xx - u^3) + f, gamma=(1+t)^-1/2, ||f||=0.5(1+t)^-2, u0=0",
       R"json({
  "kind": "pde",
  "functions": {"gamma": "power_law(1, 0.5, 1)", "forcing": "power_law(0.5, 2, 1)"},
  "parameters": {"alpha": 0.5, "k": 2},
  "theorems": ["assumption-C"],
  "grid": {"n": 100},
  "pde": {"nonlinearity": "cubic", "u0": {"type": "zero"}, "snapshot_times": [1, 100, 10000]},
  "solver": {"dt": 0.01, "t_end": 10000},
  "epsilon": 0.05,
  "expect": {"reports": {"assumption-C": "pass", "pde-checks": "pass"}, "verdict": "decays"}
})json"},
      {"assumption-a-exponential-fail", "gamma=e^-t: the dissipation integral converges, Assumption A fails",
       R"json({
  "kind": "check-only",
  "functions": {"gamma": "exponential(1, 1)", "beta": "power_law(1, 2, 1)"},
  "theorems": ["assumption-A"],
  "expect": {
    "reports": {"assumption-A": "fail"},
    "conditions": {"assumption-A/integral_gamma_diverges": "fail"}
  }
})json"},
  };
  return entries;
}

inline CatalogCase make_case(const CatalogEntry& e) {
  Json j = Json::parse(e.config);
  j["id"] = e.id;
  j["description"] = e.description;
  return {e.id, e.description, parse_scenario(j)};
}

}  // namespace detail

inline std::vector<std::string> catalog_ids() {
  std::vector<std::string> ids;
  for (const auto& e : detail::catalog_entries()) ids.emplace_back(e.id);
  return ids;
}

inline CatalogCase catalog_case(const std::string& id) {
  for (const auto& e : detail::catalog_entries())
    if (id == e.id) return detail::make_case(e);
  throw LookupError("unknown catalog case '" + id + "'");
}

inline std::vector<CatalogCase> catalog_cases() {
  std::vector<CatalogCase> out;
  for (const auto& e : detail::catalog_entries()) out.push_back(detail::make_case(e));
  return out;
}

/// Resolves a kind=catalog config: the stored case with the user's top-level keys laid over it.
/// A user `expect` block replaces the stored one.
inline ScenarioConfig resolve_catalog(const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::catalog) return cfg;
  const CatalogCase base = catalog_case(cfg.catalog_case);
  Json merged = base.scenario.source;
  for (auto it = cfg.source.begin(); it != cfg.source.end(); ++it) {
    if (it.key() == "kind" || it.key() == "case") continue;
    if (it.value().is_object() && merged.contains(it.key()) && merged[it.key()].is_object() && it.key() != "expect")
      merged[it.key()].update(it.value());
    else
      merged[it.key()] = it.value();
  }
  ScenarioConfig out = parse_scenario(merged, cfg.base_dir);
  out.catalog_case = cfg.catalog_case;
  return out;
}

}  // namespace decaykit
