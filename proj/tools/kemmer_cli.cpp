// Command-line front end: run scenario configs, list the scenario catalog,
// run the verification suite, dump the DKP matrices.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "kemmer/dkp.hpp"
#include "kemmer/scenario.hpp"
#include "kemmer/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bohmian trajectories for the Kemmer (DKP) spin-0/spin-1 theory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = -1;

  auto* run = app.add_subcommand("run", "run a scenario config file");
  run->add_option("config", config_path, "path to the scenario config")->required();
  auto* out_opt = run->add_option("--out", out_dir, "override [output] dir");
  auto* seed_opt = run->add_option("--seed", seed, "override [output] seed");
  auto* workers_opt = run->add_option("--workers", workers, "override [output] workers");

  auto* list = app.add_subcommand("list", "list scenario kinds, keys and defaults");

  bool fast = false;
  std::string scope = "all";
  std::uint64_t vseed = 20260810;
  int vworkers = 0;
  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_flag("--fast", fast, "reduced sample counts");
  verify->add_option("--scope", scope, "acceptance|modules|all")->check(CLI::IsMember({"acceptance", "modules", "all"}));
  verify->add_option("--seed", vseed, "suite seed");
  verify->add_option("--workers", vworkers, "worker threads (0 = hardware)");

  std::string spin = "both";
  auto* dump = app.add_subcommand("dump-matrices", "print the DKP beta matrices as plain-text tables");
  dump->add_option("--spin", spin, "spin0|spin1|both")->check(CLI::IsMember({"spin0", "spin1", "both"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) {
      const kemmer::ScenarioConfig cfg = kemmer::ScenarioConfig::parse_file(config_path);
      kemmer::RunOverrides ov;
      if (out_opt->count() > 0) ov.out_dir = out_dir;
      if (seed_opt->count() > 0) ov.seed = seed;
      if (workers_opt->count() > 0) ov.workers = workers;
      return kemmer::run_scenario(cfg, ov, std::cout);
    }
    if (*list) {
      std::cout << kemmer::scenario_catalog();
      return 0;
    }
    if (*verify) {
      kemmer::VerifyOptions opt;
      opt.fast = fast;
      opt.seed = vseed;
      opt.workers = vworkers;
      const auto results = scope == "acceptance"  ? kemmer::run_acceptance_checks(opt)
                           : scope == "modules"   ? kemmer::run_module_checks(opt)
                                                  : kemmer::run_all_checks(opt);
      std::cout << kemmer::format_summary(results) << kemmer::format_report(results);
      return kemmer::all_pass(results) ? 0 : 1;
    }
    if (*dump) {
      if (spin != "spin1") kemmer::dump_matrices(kemmer::representation(kemmer::Spin::spin0), std::cout);
      if (spin != "spin0") kemmer::dump_matrices(kemmer::representation(kemmer::Spin::spin1), std::cout);
      return 0;
    }
  } catch (const kemmer::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
