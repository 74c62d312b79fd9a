#pragma once

#include "run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace anomalyscan::cli {

// Each command writes its files plus run_config.json into `out` and throws
// ValidationError / ComputationError on failure.
void cmd_backtest(const RunConfig& config, const std::filesystem::path& out);
void cmd_scan(const RunConfig& config, const std::filesystem::path& out);
void cmd_regress(const RunConfig& config, const std::filesystem::path& out);
void cmd_regimes(const RunConfig& config, const std::filesystem::path& out);
void cmd_synth(const RunConfig& config, const std::filesystem::path& out);

// Dispatches by subcommand name and maps errors to exit codes:
// 0 success, 1 validation, 2 computation. Messages go to `err`.
int run_command(std::string_view name, const RunConfig& config, const std::filesystem::path& out,
                std::ostream& err);

} // namespace anomalyscan::cli
