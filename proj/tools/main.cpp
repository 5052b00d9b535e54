#include <CLI11.hpp>

#include <iostream>

#include "spinphase/spinphase.hpp"

namespace {

int cmd_verify(const std::string& suite, bool list_only) {
  if (list_only) {
    for (const std::string& name : spinphase::verify_check_names())
      std::cout << name << '\n';
    return 0;
  }
  std::vector<spinphase::CheckResult> results;
  try {
    spinphase::VerifyOptions opts;
    opts.suite = suite;
    results = spinphase::run_verify(opts);
  } catch (const spinphase::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  bool all = true;
  for (const spinphase::CheckResult& r : results) {
    all = all && r.passed;
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << " ("
              << r.elapsed_seconds << " s): " << r.detail << '\n';
  }
  spinphase::Json summary = spinphase::verify_json(results);
  summary["suite"] = suite;
  std::cout << summary.dump(2) << '\n';
  return all ? 0 : 1;
}

int cmd_batch(const std::string& configs, int jobs,
              const std::string& out_dir) {
  std::optional<std::filesystem::path> base;
  if (!out_dir.empty()) base = out_dir;
  try {
    return spinphase::run_batch(configs, jobs, base, std::cout);
  } catch (const spinphase::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and verification toolkit for the rotation of "
               "self-deforming bodies with conserved angular momentum"};
  app.require_subcommand(1);

  std::string config_path, out_dir, suite = "all", configs_dir;
  int jobs = 1;
  bool list_only = false;

  CLI::App* simulate =
      app.add_subcommand("simulate", "Integrate a scenario and write the "
                                     "trajectory and run report");
  simulate->add_option("--config", config_path, "Scenario config (JSON)")
      ->required();
  simulate->add_option("--out-dir", out_dir, "Output directory");

  CLI::App* phase = app.add_subcommand(
      "phase", "Integrate a scenario and compute the per-loop phase report");
  phase->add_option("--config", config_path, "Scenario config (JSON)")
      ->required();
  phase->add_option("--out-dir", out_dir, "Output directory");

  CLI::App* verify = app.add_subcommand(
      "verify", "Run the built-in acceptance checks and print a JSON summary");
  verify->add_option("--suite", suite, "Run one named check (default: all)");
  verify->add_flag("--list", list_only, "List check names without running");

  CLI::App* batch = app.add_subcommand(
      "batch", "Run every scenario config in a directory in parallel");
  batch->add_option("--configs", configs_dir, "Directory of *.json scenarios")
      ->required();
  batch->add_option("--jobs", jobs, "Worker thread count")
      ->default_val(1);
  batch->add_option("--out-dir", out_dir,
                    "Base output directory (one subdirectory per scenario)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::optional<std::filesystem::path> out;
  if (!out_dir.empty()) out = out_dir;
  if (simulate->parsed())
    return spinphase::run_scenario_file(config_path, false, out, std::cout);
  if (phase->parsed())
    return spinphase::run_scenario_file(config_path, true, out, std::cout);
  if (verify->parsed()) return cmd_verify(suite, list_only);
  if (batch->parsed()) return cmd_batch(configs_dir, jobs, out_dir);
  return 2;
}
