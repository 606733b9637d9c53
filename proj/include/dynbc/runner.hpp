#pragma once

#include "dynbc/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dynbc {

/// Exit codes of the command-line runner.
enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_config = 2 };

/// Output directory of a run: $PDAE_OUTPUT_DIR when set, otherwise the
/// configured directory. Created if missing.
std::string resolve_output_directory(const RunConfig& cfg);

/// Each mode writes its artifacts and returns the paths written.
std::vector<std::string> run_solve(const RunConfig& cfg);
std::vector<std::string> run_study(const RunConfig& cfg);
std::vector<std::string> run_infsup(const RunConfig& cfg);

/// Catalog of presets, coefficient functions and geometries; stable order.
std::string list_presets();

/// Machine-readable error document.
std::string error_json(const std::string& kind, const std::string& message, const std::string& field = "", int line = 0);

/// Dispatches `command` ("solve", "study", "infsup", "list-presets"),
/// reporting written files on `out` and errors as JSON on `err`.
int run_command(const std::string& command, const std::string& config_path, std::ostream& out, std::ostream& err);

/// 17 significant digits, as used in every CSV artifact.
std::string format_double(double v);

}  // namespace dynbc
