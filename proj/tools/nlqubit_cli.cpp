// Command-line front end:
//   nlqubit run <config.json> [--out DIR] [--seed N]
//   nlqubit validate <config.json>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "nlqubit/harness.hpp"

namespace h = nlqubit::harness;

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear mean-field qubit simulator"};
  app.require_subcommand(1);

  std::string run_config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", run_config, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the config seed");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", validate_config, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : h::kExitInvalidConfig;
  }

  const std::string& path = run->parsed() ? run_config : validate_config;
  h::json cfg;
  try {
    cfg = h::load_config(path);
  } catch (const nlqubit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kExitInvalidConfig;
  }

  if (validate->parsed()) {
    const auto violations = h::validate(cfg);
    for (const auto& v : violations) std::cout << "violation: " << v << '\n';
    if (violations.empty()) std::cout << path << ": ok\n";
    return violations.empty() ? h::kExitOk : h::kExitInvalidConfig;
  }

  try {
    const auto report = h::run(cfg, {std::filesystem::path(out_dir), seed});
    for (const auto& v : report.violations) std::cerr << "violation: " << v << '\n';
    for (const auto& f : report.failed_cells) std::cerr << "failed: " << f << '\n';
    for (const auto& o : report.outputs) std::cout << "wrote " << o.string() << '\n';
    return report.exit_code;
  } catch (const h::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return h::kExitInvalidConfig;
  } catch (const nlqubit::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return h::kExitNumericalFailure;
  }
}
