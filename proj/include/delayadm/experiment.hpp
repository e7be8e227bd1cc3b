#pragma once

// Config-driven experiment runner behind the command-line tool: parses and
// validates a JSON config, runs one experiment, writes its artifacts and the
// run manifest run.json, and maps the outcome to an exit code.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "delayadm/io.hpp"
#include "delayadm/population.hpp"
#include "delayadm/semigroup.hpp"

namespace delayadm {

inline constexpr const char* kVersion = "1.0.0";

/// Exit codes of run_experiment.
enum ExitCode : int { kExitPass = 0, kExitError = 1, kExitCheckFailed = 2 };

/// Experiment names accepted on the command line.
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  std::string experiment;
  Json raw;
  std::uint64_t seed = 42;
  GridSpec grid;
  std::optional<DelaySystem> system;
  std::optional<PopulationConfig> population;
  /// FNV-1a of the config file bytes.
  std::string config_hash;
  /// Command-line override of the admissibility ω.
  std::optional<double> omega;
};

/// Reads and parses `path`. `experiment` may be empty when the config names
/// its own; when both are given they must agree. Throws ConfigError with a
/// line-anchored message for malformed JSON.
ExperimentConfig load_config(const std::string& path, const std::string& experiment,
                             std::optional<std::uint64_t> seed = std::nullopt, int refine = 1);

/// Static validation without running anything; one message per problem.
std::vector<std::string> validate_config(const std::string& path, const std::string& experiment = "");

struct RunOptions {
  std::string experiment;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int refine = 1;
  std::optional<double> omega;
};

/// Runs the experiment and writes artifacts plus run.json into out_dir.
/// Returns kExitPass, kExitCheckFailed or kExitError; never throws.
int run_experiment(const RunOptions& opts, std::string* error_message = nullptr);

}  // namespace delayadm
