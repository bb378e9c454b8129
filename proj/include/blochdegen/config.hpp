#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blochdegen/core_model.hpp"
#include "blochdegen/potentials.hpp"

namespace blochdegen {

/// Either a seeded random series or an explicit amplitude list.
struct PotentialSpec {
  Parity parity = Parity::Even;
  std::uint64_t seed = 1;
  int shells = 6;
  double scale = 0.2;
  double decay = 0.7;
  /// When non-empty, used verbatim instead of the seeded series.
  std::vector<std::pair<GIndex, Complex>> amplitudes;
};

struct ExternalSpec {
  ExternalKind kind = ExternalKind::Sawtooth;
  GIndex direction{1, 0, 0};  ///< sawtooth supercell reciprocal index
  double strength = 1e-3;
  GIndex supercell{8, 1, 1};
  int harmonics = 0;  ///< 0 selects enough harmonics to couple every folded plane wave
  Vec3 center{0.5, 0.5, 0.5};
  double width = 0.8;
  GIndex harmonic_box{12, 2, 2};
};

enum class Regime { Pinacoidal, Pedial };

const char* regime_name(Regime r) noexcept;

struct Tolerances {
  double deg = 1e-9;
  double identity = 1e-12;
  double transform = 1e-10;
  double selection = 1e-12;
  double null_ratio = 1e-10;
  double closed_form = 1e-12;
  double kramers = 1e-10;
  double maps = 1e-10;
  double oracle_relative = 0.05;
  double exponent_min = 1.9;
};

struct VerifySection {
  std::size_t states = 50;
  std::size_t eigenstates = 10;
  double so_scale = 1e4;  ///< spin-orbit scale of the SO-on transformation regimes
};

struct BandsSection {
  std::vector<Vec3> path{{0, 0, 0}, {0.5, 0, 0}, {0.5, 0.5, 0}, {0, 0, 0}, {0.5, 0.5, 0.5}};
  int samples = 20;
  std::size_t num_bands = 8;
  bool include_odd = false;
  bool include_so = false;
};

struct DegeneracySection {
  double so_scale = 1e4;
  std::size_t clusters = 6;  ///< spinless levels inspected per regime
};

struct PerturbSection {
  bool u1 = true;
  bool u2 = true;
  bool phi_orbital = true;
  double delta_scale = 1.0;
};

struct ExternalSection {
  Regime regime = Regime::Pinacoidal;
  double delta_scale = 0.05;
  double gmax = 16.0;
};

struct OracleSection {
  Regime regime = Regime::Pinacoidal;
  std::vector<double> lambdas{1e-4, 2e-4, 4e-4, 8e-4};
  double delta_scale = 0.05;
  double gmax = 16.0;
};

/// Complete run description. Every field has a default; a config file only
/// lists what it changes, and unknown keys are rejected.
struct RunConfig {
  std::array<Vec3, 3> lattice{Vec3(1.0, 0.0, 0.0), Vec3(0.5, 1.1, 0.0), Vec3(0.2, 0.3, 1.3)};
  double gmax = 23.0;
  double so_scale = 1.0;
  PotentialSpec v0;
  std::optional<PotentialSpec> phi;
  std::optional<ExternalSpec> external;
  Vec3 kpoint{0.137, 0.211, 0.093};
  std::optional<std::pair<GIndex, GIndex>> kpoint_bvk;  ///< (m, N) when given as a Born-von Karman index
  std::size_t band = 0;
  Vec3 spin_axis = Vec3::UnitZ();
  std::uint64_t seed = 1;
  std::string output = "out";
  Tolerances tolerances;
  VerifySection verify;
  BandsSection bands;
  DegeneracySection degeneracy;
  PerturbSection perturb;
  ExternalSection external_run;
  OracleSection oracle;
};

/// Throws ConfigError for malformed input or unknown keys, and the physics
/// validation errors (ParityViolation, NonHermitianAmplitudes,
/// SingularLattice, OutOfRange, IncommensurateK) for inconsistent values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Fully populated echo of a configuration.
nlohmann::json to_json(const RunConfig& cfg);

/// Builds the potential a spec describes and validates it against its parity tag.
FourierPotential build_potential(const TriclinicLattice& lattice, const PotentialSpec& spec);

/// Resolves the sawtooth/bump for a run; harmonics = 0 is expanded from the cutoff.
ExternalPotential build_external(const TriclinicLattice& lattice, const ExternalSpec& spec, double gmax,
                                 const Vec3& kpoint);

}  // namespace blochdegen
