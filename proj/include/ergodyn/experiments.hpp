#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace ergodyn {

// Effective run configuration: a JSON document (file and/or flag overrides
// merged by the CLI).  Every command echoes the merged config to the output
// directory and embeds its digest in each artifact header.
struct RunContext {
    nlohmann::json config;
    std::filesystem::path out_dir;
};

// Exit statuses shared by the commands and the CLI.
enum ExitCode : int { kOk = 0, kConfigError = 2, kBudgetError = 3, kPartialFailure = 4 };

std::string config_digest(const nlohmann::json& config);

// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Single-orbit measures: per (N, start) runs Floyd, the orbit measure, its
// distance to Leb_N, and a raster.  Failed sub-runs are recorded; the scan
// continues.
int cmd_measure_orbit(const RunContext& ctx);

// Whole-grid analysis: cycles, basins, recurrence degree, global measure,
// distance to Leb_N, raster.
int cmd_measure_global(const RunContext& ctx);

// Linear-rate engine commands.
int cmd_linear_rate(const RunContext& ctx);
int cmd_linear_meanrate(const RunContext& ctx);
int cmd_linear_preimage(const RunContext& ctx);
int cmd_linear_decay(const RunContext& ctx);

// Re-renders a stored measure CSV with a new raster spec.
int cmd_render(const RunContext& ctx);

}  // namespace ergodyn
