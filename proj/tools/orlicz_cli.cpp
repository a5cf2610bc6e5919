#include "orlicz/config.hpp"
#include "orlicz/error.hpp"
#include "orlicz/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

int main(int argc, char** argv) {
  CLI::App app{"Orlicz-space harmonic analysis experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 1;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run every scenario in a config file");
  run->add_option("config", config_path, "Scenario file (JSON)")->required();
  run->add_option("--threads", threads, "Scenarios run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Seed for every scenario (overrides the config)");

  auto* list = app.add_subcommand("list", "Print the built-in catalog");

  auto* validate = app.add_subcommand("validate", "Parse and check a config file without running it");
  validate->add_option("config", config_path, "Scenario file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (*list) {
    for (const auto& e : orlicz::builtin_catalog()) {
      std::printf("%-10s %-22s %s\n", e.kind.c_str(), e.name.c_str(), e.params.c_str());
    }
    return 0;
  }

  orlicz::Config cfg;
  try {
    cfg = orlicz::load_config(config_path);
  } catch (const orlicz::Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  if (*validate) {
    std::printf("%s: %zu scenarios OK\n", config_path.c_str(), cfg.scenarios.size());
    return 0;
  }

  if (seed) {
    cfg.seed = *seed;
    for (auto& s : cfg.scenarios) s.seed = *seed;
  }
  const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
  const auto reports = orlicz::run_config(cfg, dir, threads);
  try {
    orlicz::write_summary(reports, dir, config_path);
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  int failed = 0;
  for (const auto& r : reports) {
    std::printf("[%s] %s\n", r.passed() ? "PASS" : "FAIL", r.id.c_str());
    for (const auto& a : r.assertions) {
      if (!a.passed) std::printf("    failed: %s %s\n", a.name.c_str(), a.detail.c_str());
    }
    failed += r.passed() ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
