// SPDX-License-Identifier: Apache-2.0
//
// Config-driven experiment dispatch shared by the command-line tool and tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "grassq/report.hpp"

namespace grassq {

/// Experiment names accepted by run_experiment (also the CLI subcommands).
const std::vector<std::string>& experiment_names();

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config's "seed"
  std::optional<unsigned> threads;    // overrides the config's "threads"
};

/// Validates `config` against the named experiment and runs it. Invalid or
/// unknown fields raise ConfigError with the field named in the message.
ExperimentReport run_experiment(const std::string& experiment, const nlohmann::json& config,
                                const RunOptions& options = {});

/// Reads a JSON config file (ConfigError if unreadable or malformed).
nlohmann::json load_config(const std::filesystem::path& path);

/// Writes <dir>/<experiment>.csv and <dir>/<experiment>.json.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Builds a codebook from a config with n, p, q, beta, K, kind (random|maxmin),
/// iters, and writes it to `path`. Returns the summary written to stdout.
nlohmann::ordered_json save_codebook_from_config(const nlohmann::json& config,
                                                 const RunOptions& options,
                                                 const std::filesystem::path& path);

/// Loads and re-validates a codebook file and summarizes it.
nlohmann::ordered_json describe_codebook_file(const std::filesystem::path& path);

}  // namespace grassq
