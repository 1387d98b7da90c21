#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "decaykit/decaykit.hpp"

using namespace decaykit;
namespace fs = std::filesystem;

namespace {

Json surrogate_json() {
  return Json::parse(R"j({
    "id": "tiny",
    "kind": "surrogate",
    "functions": {"a": "constant(1)", "b": "constant(0)", "f": "monomial(1, 1)"},
    "parameters": {"g0": 1},
    "theorems": ["thm-2-13"],
    "solver": {"dt": 0.01, "t_end": 40}
  })j");
}

std::string error_of(const Json& j) {
  try {
    parse_scenario(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("decaykit_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Parse, MinimalSurrogate) {
  const auto c = parse_scenario(surrogate_json());
  EXPECT_EQ(c.kind, ScenarioKind::surrogate);
  EXPECT_EQ(c.id, "tiny");
  EXPECT_EQ(c.solver.t_end, 40.0);
  EXPECT_EQ(c.param("g0").value_or(-1), 1.0);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_FALSE(c.expect.present);
}

TEST(Parse, ErrorsNameTheField) {
  auto j = surrogate_json();
  j["solver"]["dtt"] = 1;
  EXPECT_NE(error_of(j).find("solver.dtt"), std::string::npos) << error_of(j);

  j = surrogate_json();
  j["functions"].erase("a");
  EXPECT_NE(error_of(j).find("functions.a"), std::string::npos);

  j = surrogate_json();
  j["epsilon"] = -1;
  EXPECT_NE(error_of(j).find("epsilon"), std::string::npos);

  j = surrogate_json();
  j["kind"] = "simulation";
  EXPECT_FALSE(error_of(j).empty());

  j = surrogate_json();
  j.erase("kind");
  EXPECT_NE(error_of(j).find("kind"), std::string::npos);

  j = surrogate_json();
  j["seed"] = -3;
  EXPECT_NE(error_of(j).find("seed"), std::string::npos);

  j = surrogate_json();
  j["expect"] = {{"verdict", "gone"}};
  EXPECT_FALSE(error_of(j).empty());
}

TEST(Parse, PdeNeedsGamma) {
  const Json j = {{"kind", "pde"}, {"functions", {{"forcing", "constant(0)"}}}};
  EXPECT_NE(error_of(j).find("functions.gamma"), std::string::npos);
}

TEST(Parse, PeanoShapes) {
  Json j = {{"kind", "peano"}, {"peano", {{"matrix", {{-1.0, 0.0}}}, {"u0", {1.0, 2.0}}}}};
  EXPECT_NE(error_of(j).find("peano.matrix"), std::string::npos);
}

TEST(Parse, BadDescriptorReportedOnResolve) {
  auto j = surrogate_json();
  j["functions"]["a"] = "powr_law(1, 2)";
  const auto c = parse_scenario(j);
  try {
    resolve_inputs(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("functions.a"), std::string::npos);
  }
}

TEST(Parse, LoadFromFileAndMalformedJson) {
  const auto d = fresh_dir("load");
  std::ofstream(d / "ok.json") << surrogate_json().dump();
  std::ofstream(d / "bad.json") << "{\"kind\": ";
  EXPECT_EQ(load_scenario(d / "ok.json").base_dir, d);
  EXPECT_THROW(load_scenario(d / "bad.json"), ConfigError);
  EXPECT_THROW(load_scenario(d / "missing.json"), ConfigError);
}

TEST(Catalog, IdsAndLookup) {
  const auto ids = catalog_ids();
  for (const char* want : {"remark-2-2", "alpha-gt-1", "thm-2-11-pass", "thm-2-11-divergence-fail", "thm-2-13-pass",
                           "pde-example", "assumption-a-exponential-fail"})
    EXPECT_NE(std::find(ids.begin(), ids.end(), want), ids.end()) << want;
  EXPECT_THROW(catalog_case("nope"), LookupError);
  for (const auto& c : catalog_cases()) {
    EXPECT_TRUE(c.scenario.expect.present) << c.id;
    EXPECT_EQ(c.scenario.id, c.id);
  }
}

TEST(Catalog, OverrideMergesShallowly) {
  const Json j = {{"kind", "catalog"}, {"case", "thm-2-11-pass"}, {"solver", {{"t_end", 50}}}};
  const auto merged = resolve_catalog(parse_scenario(j));
  EXPECT_EQ(merged.kind, ScenarioKind::surrogate);
  EXPECT_EQ(merged.solver.t_end, 50.0);
  EXPECT_EQ(merged.solver.dt, 0.01);
  EXPECT_EQ(merged.catalog_case, "thm-2-11-pass");
  EXPECT_THROW(resolve_catalog(parse_scenario({{"kind", "catalog"}, {"case", "zzz"}})), LookupError);
}

// every stored expectation is met by the case as shipped
TEST(CatalogSuite, StoredExpectationsHold) {
  for (const auto& c : catalog_cases()) {
    const auto r = run_scenario(c.scenario);
    EXPECT_EQ(r.exit_code, exit_code::ok) << c.id << "\n" << r.report["expectations"].dump(2);
    EXPECT_TRUE(r.report["complete"].get<bool>()) << c.id;
    EXPECT_EQ(r.report["expectations_source"], "config");
  }
}

TEST(CatalogSuite, InvertedExpectationIsViolation) {
  const Json j = {{"kind", "catalog"},
                  {"case", "remark-2-2"},
                  {"expect", {{"reports", {{"thm-2-1@v=1", "fail"}, {"thm-2-1@v=2", "pass"}}}}}};
  const auto r = run_scenario(parse_scenario(j));
  EXPECT_EQ(r.exit_code, exit_code::violated);
}

TEST(Runner, SurrogateReportAndArtifacts) {
  const auto r = run_scenario(parse_scenario(surrogate_json()));
  EXPECT_EQ(r.exit_code, exit_code::ok) << r.report.dump(2);
  const auto& rep = r.report;
  EXPECT_EQ(rep["verdict"]["status"], "decays");
  EXPECT_EQ(rep["expectations_source"], "implicit");
  EXPECT_EQ(rep["scenario"]["config_hash"].get<std::string>().size(), 16u);
  bool pipeline = false;
  for (const auto& t : rep["reports"]) pipeline = pipeline || t["theorem"] == "thm-2-13-pipeline";
  EXPECT_TRUE(pipeline);
  ASSERT_FALSE(r.artifacts.empty());
  EXPECT_EQ(r.artifacts[0].name, "trajectory.csv");
  EXPECT_EQ(r.artifacts[0].content.rfind("t,g\n0,1\n", 0), 0u);
  EXPECT_TRUE(rep["horizons"].contains("verdict"));
}

TEST(Runner, OverridesAndHypothesesOnly) {
  RunOptions opt;
  opt.t_end = 10;
  opt.tol = 0.5;
  opt.seed = 7;
  const auto r = run_scenario(parse_scenario(surrogate_json()), opt);
  EXPECT_EQ(r.report["verdict"]["horizon"], 10.0);
  EXPECT_EQ(r.report["scenario"]["seed"], 7);
  EXPECT_NE(r.report["scenario"]["config_hash"], run_scenario(parse_scenario(surrogate_json())).report["scenario"]["config_hash"]);

  RunOptions only;
  only.hypotheses_only = true;
  const auto h = run_scenario(parse_scenario(surrogate_json()), only);
  EXPECT_TRUE(h.report["verdict"].is_null());
  EXPECT_TRUE(h.artifacts.empty());
}

TEST(Runner, ExpectedFloorMismatchIsViolation) {
  auto j = surrogate_json();
  j["functions"]["b"] = "constant(0.5)";  // b/a does not tend to 0, so the theorem fails as it should
  j["expect"] = {{"reports", {{"thm-2-13", "fail"}, {"thm-2-13-pipeline", "fail"}}}, {"verdict", "no_decay"}, {"floor", 0.4}, {"floor_tol", 0.01}};
  const auto r = run_scenario(parse_scenario(j));
  EXPECT_EQ(r.report["verdict"]["status"], "no_decay");
  EXPECT_EQ(r.exit_code, exit_code::violated);
  j["expect"]["floor"] = 0.5;
  EXPECT_EQ(run_scenario(parse_scenario(j)).exit_code, exit_code::ok);
}

TEST(Runner, InconclusiveVerdictGivesExitTwo) {
  auto j = surrogate_json();
  j["functions"]["a"] = "power_law(1, 1, 1)";  // g = 1/(1+t): too slow for eps at t = 40
  j["theorems"] = Json::array();
  const auto r = run_scenario(parse_scenario(j));
  EXPECT_EQ(r.report["verdict"]["status"], "inconclusive");
  EXPECT_EQ(r.exit_code, exit_code::inconclusive);
}

TEST(Runner, PeanoPipeline) {
  const Json j = {{"id", "peano-decay"},
                  {"kind", "peano"},
                  {"peano", {{"matrix", {{-1.0}}}, {"u0", {1.0}}, {"n_list", {8, 16, 32}}}}};
  const auto r = run_scenario(parse_scenario(j));
  EXPECT_EQ(r.exit_code, exit_code::ok) << r.report.dump(2);
  EXPECT_EQ(r.artifacts.size(), 4u);
}

TEST(Runner, PdeShortRun) {
  auto c = catalog_case("pde-example").scenario;
  RunOptions opt;
  opt.t_end = 20;
  opt.tol = 1.0;
  const auto r = run_scenario(c, opt);
  EXPECT_EQ(r.exit_code, exit_code::ok) << r.report["expectations"].dump(2);
  std::size_t snaps = 0;
  for (const auto& a : r.artifacts) snaps += a.name.rfind("snapshots/", 0) == 0;
  EXPECT_EQ(snaps, 1u);  // only t = 1 falls inside [0, 20]
}

TEST(Runner, NumericAbortIsExitOne) {
  auto j = surrogate_json();
  j["functions"]["b"] = "monomial(1, 400)";  // overflows near t = 6
  j["theorems"] = Json::array();
  const auto r = run_scenario(parse_scenario(j));
  EXPECT_EQ(r.exit_code, exit_code::violated);
}

TEST(Determinism, ReportsAreByteIdentical) {
  auto c = catalog_case("pde-example").scenario;
  RunOptions opt;
  opt.t_end = 50;
  const auto a = render_report(run_scenario(c, opt)), b = render_report(run_scenario(c, opt));
  EXPECT_EQ(a, b);
  const auto s1 = render_report(run_scenario(parse_scenario(surrogate_json())));
  EXPECT_EQ(s1, render_report(run_scenario(parse_scenario(surrogate_json()))));
}

TEST(Determinism, HashIgnoresOutDir) {
  auto j = surrogate_json();
  const auto h1 = config_hash(parse_scenario(j));
  j["out_dir"] = "/somewhere/else";
  EXPECT_EQ(config_hash(parse_scenario(j)), h1);
  j["epsilon"] = 0.002;
  EXPECT_NE(config_hash(parse_scenario(j)), h1);
}

TEST(Emit, WritesArtifactsAndReport) {
  const auto d = fresh_dir("emit");
  const auto r = run_scenario(parse_scenario(surrogate_json()));
  emit_outputs(r, d / "out");
  EXPECT_TRUE(fs::exists(d / "out" / "report.json"));
  EXPECT_TRUE(fs::exists(d / "out" / "trajectory.csv"));
  std::ifstream in(d / "out" / "report.json");
  EXPECT_EQ(Json::parse(in), r.report);
}

TEST(Emit, UnwritableDirectoryIsConfigError) {
  const auto d = fresh_dir("unwritable");
  std::ofstream(d / "file") << "x";
  const auto r = run_scenario(parse_scenario(surrogate_json()), RunOptions{std::nullopt, std::nullopt, std::nullopt, true});
  EXPECT_THROW(emit_outputs(r, d / "file" / "sub"), ConfigError);
}

TEST(JsonNumbers, NonFiniteBecomesString) {
  EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(json_number(1.5), 1.5);
}

TEST(Samples, AllParseAndResolve) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(DECAYKIT_SCENARIO_DIR)) {
    if (e.path().extension() != ".json") continue;
    SCOPED_TRACE(e.path().string());
    const auto c = resolve_catalog(load_scenario(e.path().string()));
    EXPECT_NO_THROW(resolve_inputs(c));
    ++n;
  }
  EXPECT_GE(n, 5u);
}
