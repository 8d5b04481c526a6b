#pragma once

#include <filesystem>

#include "vmimo/config.hpp"

namespace vmimo {

/// Batch entry points behind the CLI. Each is a pure function of
/// (config, seed) -> files under out_dir; reruns are byte-identical.

/// Writes scenario.json plus datasets/user_<id>.csv per inactive user.
void cmd_gen_data(const RunConfig& config, const std::filesystem::path& out_dir);

/// Trains the configured classifier for every inactive user on the same
/// datasets gen-data emits; writes models/ and traces/.
void cmd_train(const RunConfig& config, const std::filesystem::path& out_dir);

/// Tables II/III analog: report.csv over evaluate.user_counts and
/// evaluate.classifiers.
void cmd_evaluate(const RunConfig& config, const std::filesystem::path& out_dir);

/// Full selection rounds for one seeded SU: rounds.jsonl, per-round path
/// reports, summary.csv, scenario.json.
void cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir);

/// Discovery-time sweep over timing_sweep.user_counts: timing.csv.
void cmd_compare_timing(const RunConfig& config,
                        const std::filesystem::path& out_dir);

}  // namespace vmimo
