#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blochdegen/config.hpp"

namespace blochdegen {

/// One tolerance comparison. `at_least` flips the sense to value ≥ limit.
struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool at_least = false;

  bool pass() const { return at_least ? value >= limit : value <= limit; }
};

/// Output of one subcommand: a JSON results tree, the checks that decide
/// the exit status, and optionally a CSV table.
struct ScenarioResult {
  nlohmann::json results = nlohmann::json::object();
  std::vector<Check> checks;
  std::optional<std::string> csv_name;
  std::string csv;

  bool passed() const;
  /// First failing check, if any.
  const Check* first_failure() const;
};

/// Operator identity suite plus the transformation laws of K, I and C on
/// eigenstates of three regimes (pinacoidal without and with spin-orbit,
/// pedial with spin-orbit).
ScenarioResult run_verify(const RunConfig& cfg);

/// Band energies along the configured path; fills bands.csv.
ScenarioResult run_bands(const RunConfig& cfg);

/// Merged ±k cluster structure in the four regimes, with the first-order
/// secular analysis of every quartet alongside.
ScenarioResult run_degeneracy(const RunConfig& cfg);

/// Quartet, secular matrix, first-order splitting and subspace maps at the
/// configured band and k, compared with the exact ±k spectra.
ScenarioResult run_perturb(const RunConfig& cfg);

/// Adds the external field: β′, the regime splitting formula and the
/// supercell oracle. Throws ConfigError if no external field is configured.
ScenarioResult run_external(const RunConfig& cfg);

/// Linearity scan of the external splitting over the configured strengths; fills scan.csv.
ScenarioResult run_oracle(const RunConfig& cfg);

/// Dispatches on a subcommand name; throws ConfigError for unknown names.
ScenarioResult run_scenario(const std::string& command, const RunConfig& cfg);

/// Shared model pieces of a run.
struct RunModel {
  TriclinicLattice lattice;
  PhysicalConstants constants;
  FourierPotential v0;
  std::optional<FourierPotential> phi;
};

RunModel make_model(const RunConfig& cfg);

}  // namespace blochdegen
