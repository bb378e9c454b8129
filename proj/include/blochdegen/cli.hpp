#pragma once

#include <optional>
#include <string>
#include <utility>

#include <json.hpp>

#include "blochdegen/errors.hpp"
#include "blochdegen/scenarios.hpp"

namespace blochdegen {

/// Exit status for an error kind: 2 for invalid input (configuration,
/// parity tags, lattice, k-point and basis problems), 1 for failed checks.
int exit_code(ErrorKind kind) noexcept;

/// Report tree: command, version, seed, full config echo, results, checks, status.
nlohmann::json build_report(const std::string& command, const RunConfig& cfg, const ScenarioResult& result);

/// Paths of non-finite numbers in a JSON tree ("results.x[2]" style).
std::vector<std::string> non_finite_paths(const nlohmann::json& j);

/// Writes report.json (and the CSV, when given) into `dir`, creating it.
/// Throws IoFailure.
void emit_report(const std::string& dir, const nlohmann::json& report,
                 const std::optional<std::pair<std::string, std::string>>& csv = std::nullopt);

/// `blochdegen <command> --config <path> [--out <dir>] [--seed <u64>]`.
/// Returns 0 when every check passes, 1 on a failed check, 2 on invalid input.
int run_command(int argc, const char* const* argv);

}  // namespace blochdegen
