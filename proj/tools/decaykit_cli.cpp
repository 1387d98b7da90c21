#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "decaykit/decaykit.hpp"

namespace dk = decaykit;

namespace {

struct Flags {
  std::string config;
  std::string out_dir;
  std::optional<double> t_end;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::string case_id;
};

void add_common(CLI::App* cmd, Flags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "scenario config (JSON)");
  if (config_required) c->required();
  cmd->add_option("--out-dir", f.out_dir, "output directory (default: config out_dir, else out/<id>)");
  cmd->add_option("--t-end", f.t_end, "override the simulated horizon");
  cmd->add_option("--tol", f.tol, "override the decay threshold epsilon");
  cmd->add_option("--seed", f.seed, "override the probe sampling seed");
}

void print_summary(const dk::RunResult& r, const std::filesystem::path& dir) {
  const auto& rep = r.report;
  std::cout << "scenario " << rep["scenario"]["id"].get<std::string>() << " (" << rep["scenario"]["kind"].get<std::string>()
            << ", hash " << rep["scenario"]["config_hash"].get<std::string>() << ")\n";
  for (const auto& t : rep["reports"])
    std::cout << "  " << t["theorem"].get<std::string>() << ": " << t["status"].get<std::string>() << "\n";
  if (!rep["verdict"].is_null()) std::cout << "  verdict: " << rep["verdict"]["status"].get<std::string>() << "\n";
  for (const auto& e : rep["expectations"])
    if (e["outcome"] != "met")
      std::cout << "  expectation " << e["target"].get<std::string>() << ": expected " << e["expected"].get<std::string>()
                << ", got " << e["actual"].get<std::string>() << " (" << e["outcome"].get<std::string>() << ")\n";
  if (!rep["abort_reason"].is_null()) std::cout << "  aborted: " << rep["abort_reason"].get<std::string>() << "\n";
  std::cout << "  report: " << (dir / "report.json").string() << "\n";
  std::cout << "exit " << r.exit_code << "\n";
}

int run(const dk::ScenarioConfig& cfg, const Flags& f, bool hypotheses_only) {
  dk::RunOptions opt;
  opt.t_end = f.t_end;
  opt.tol = f.tol;
  opt.seed = f.seed;
  opt.hypotheses_only = hypotheses_only;
  const dk::RunResult r = dk::run_scenario(cfg, opt);
  std::filesystem::path dir = !f.out_dir.empty() ? f.out_dir : !cfg.out_dir.empty() ? cfg.out_dir : "out/" + cfg.id;
  dk::emit_outputs(r, dir);
  print_summary(r, dir);
  return r.exit_code;
}

dk::ScenarioConfig load_for(const Flags& f, std::optional<dk::ScenarioKind> want) {
  dk::ScenarioConfig cfg = dk::load_scenario(f.config);
  if (want && cfg.kind != *want && cfg.kind != dk::ScenarioKind::catalog)
    throw dk::ConfigError(std::string("field 'kind': this subcommand runs kind=") + dk::to_string(*want) + ", config has " +
                          dk::to_string(cfg.kind));
  if (want && cfg.kind == dk::ScenarioKind::catalog) {
    const auto resolved = dk::resolve_catalog(cfg);
    if (resolved.kind != *want)
      throw dk::ConfigError("catalog case '" + cfg.catalog_case + "' is kind=" + dk::to_string(resolved.kind));
  }
  return cfg;
}

std::string catalog_help() {
  std::string s = "Built-in cases:\n";
  for (const auto& c : dk::catalog_cases()) s += "  " + c.id + "  " + c.description + "\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decaykit: decay checks for g' <= -a f(g) + b and dissipative evolution problems"};
  app.require_subcommand(1);
  app.footer("exit codes: 0 expectations met, 1 expectation violated or run aborted, 2 inconclusive, 3 usage/config error");
  Flags f;
  auto* simulate = app.add_subcommand("simulate", "surrogate ODE: hypotheses, solve, decay verdict");
  auto* pde = app.add_subcommand("pde", "semilinear heat equation with time-dependent dissipation");
  auto* peano = app.add_subcommand("peano", "Peano delayed-argument iterates against a reference solve");
  auto* check = app.add_subcommand("check", "hypothesis checks only, no time stepping");
  auto* catalog = app.add_subcommand("catalog", "run a built-in case (by id, or kind=catalog config)");
  auto* list = app.add_subcommand("list-catalog", "list the built-in case ids");
  add_common(simulate, f, true);
  add_common(pde, f, true);
  add_common(peano, f, true);
  add_common(check, f, true);
  add_common(catalog, f, false);
  catalog->add_option("id", f.case_id, "catalog case id");
  catalog->footer(catalog_help());

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dk::exit_code::usage;
  }

  try {
    if (list->parsed()) {
      for (const auto& c : dk::catalog_cases()) std::cout << c.id << "\t" << c.description << "\n";
      return 0;
    }
    if (simulate->parsed()) return run(load_for(f, dk::ScenarioKind::surrogate), f, false);
    if (pde->parsed()) return run(load_for(f, dk::ScenarioKind::pde), f, false);
    if (peano->parsed()) return run(load_for(f, dk::ScenarioKind::peano), f, false);
    if (check->parsed()) return run(load_for(f, std::nullopt), f, true);
    if (catalog->parsed()) {
      if (f.case_id.empty() == f.config.empty()) throw dk::ConfigError("catalog needs exactly one of <id> or --config");
      if (!f.case_id.empty()) return run(dk::catalog_case(f.case_id).scenario, f, false);
      const auto cfg = dk::load_scenario(f.config);
      if (cfg.kind != dk::ScenarioKind::catalog) throw dk::ConfigError("field 'kind': catalog subcommand needs kind=catalog");
      return run(cfg, f, false);
    }
  } catch (const dk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return dk::exit_code::usage;
  } catch (const dk::LookupError& e) {
    std::cerr << "lookup error: " << e.what() << "\n";
    return dk::exit_code::usage;
  } catch (const std::exception& e) {
    std::cerr << "aborted: " << e.what() << "\n";
    return dk::exit_code::violated;
  }
  return dk::exit_code::usage;
}
