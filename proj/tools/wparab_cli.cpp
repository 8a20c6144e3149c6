#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wparab/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Audits for weighted parabolic equations"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  const char* stages[] = {"weights", "geometry", "solve", "audit", "levelset", "flatten", "all"};
  for (const char* name : stages) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
    sub->add_option("--config", config, "experiment config (JSON)")->required();
    sub->add_option("--out", out, "output directory (default: $WPARAB_OUT or ./out)");
    sub->add_option("--seed", seed, "seed for randomized audits, overrides the config");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const bool has_seed = app.get_subcommands().front()->count("--seed") > 0;
  if (out.empty()) {
    const char* env = std::getenv("WPARAB_OUT");
    out = env && *env ? env : "out";
  }

  const auto stage = wparab::parse_stage(name);
  const wparab::RunResult r = wparab::run_experiment(
      *stage, config, out, has_seed ? std::optional<std::uint64_t>(seed) : std::nullopt);
  if (r.exit_code == 2) {
    std::cerr << "wparab: " << r.message << "\n";
    return 2;
  }
  for (const auto& [report, pass] : r.reports) std::cout << (pass ? "pass " : "FAIL ") << report << "\n";
  std::cout << (r.exit_code == 0 ? "all audits passed" : "some audits failed") << " (" << out << ")\n";
  return r.exit_code;
}
