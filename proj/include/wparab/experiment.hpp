#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wparab {

enum class Stage { Weights, Geometry, Solve, Audit, Levelset, Flatten, All };

std::optional<Stage> parse_stage(const std::string& name);
const char* to_string(Stage stage);

struct RunResult {
  /// 0 all selected audits pass, 1 some audit failed, 2 configuration or I/O error.
  int exit_code = 0;
  std::string message;
  std::map<std::string, bool> reports;
  std::vector<std::string> files;
};

/// Runs one stage of a JSON experiment config and writes reports under `out`.
/// `seed` overrides the config's seed.
RunResult run_experiment(Stage stage, const std::filesystem::path& config,
                         const std::filesystem::path& out, std::optional<std::uint64_t> seed);
RunResult run_experiment_text(Stage stage, const std::string& config_json,
                              const std::filesystem::path& out, std::optional<std::uint64_t> seed);

}  // namespace wparab
