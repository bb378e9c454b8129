#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "blochdegen/hamiltonian.hpp"

namespace blochdegen {

/// Unit-cell wavevectors folded into one supercell sector: plane waves
/// unit_k + g for g in unit_g.
struct SupercellSector {
  GIndex residue{0, 0, 0};
  Vec3 unit_k = Vec3::Zero();
  std::vector<GIndex> unit_g;
};

/// Terms of the full Hamiltonian diagonalized on the supercell.
struct OracleTerms {
  const FourierPotential* v0 = nullptr;
  const FourierPotential* phi = nullptr;
  const ExternalPotential* external = nullptr;
  bool so_v0 = false;
  bool so_phi = false;
  bool so_external = false;
  bool spinful = true;
  double delta_scale = 1.0;  ///< multiplies -eφ, U₁ and U₂
};

/// Supercell Hamiltonian at the supercell Γ point. Supercell index n′
/// stands for the unit-cell wavevector n′/N; unit-cell amplitudes sit on
/// N-divisible indices, the external field on the others.
struct SupercellModel {
  GIndex repetitions{1, 1, 1};
  TriclinicLattice unit_lattice = TriclinicLattice::cubic();
  TriclinicLattice lattice = TriclinicLattice::cubic();
  Vec3 unit_k = Vec3::Zero();
  std::shared_ptr<const GVectorSet> gvectors;
  std::vector<SupercellSector> sectors;
  std::optional<FourierPotential> v0, phi, external;
  bool so_v0 = false, so_phi = false, so_external = false, spinful = true;
  double delta_scale = 1.0;
  PhysicalConstants constants;

  PlaneWaveBasis basis() const { return PlaneWaveBasis{Vec3::Zero(), 0.0, gvectors}; }
  HamiltonianMatrix hamiltonian() const;
};

/// Folds the unit-cell problem with cutoff `gmax` onto an N supercell. Each
/// sector reuses the unit basis, shifted so that the sectors of ±unit_k hold
/// exactly the plane waves ±unit_k + G, |G| ≤ gmax. Throws IncommensurateK
/// unless N∘unit_k is integral, and BasisMismatch if an external field was
/// built for a different supercell.
SupercellModel supercell_fold(const TriclinicLattice& unit_lattice, const OracleTerms& terms, const GIndex& repetitions,
                              double gmax, const Vec3& unit_k, const PhysicalConstants& constants = {});

struct ExactSplitting {
  Eigen::Vector4d levels = Eigen::Vector4d::Zero();
  double splitting = 0.0;     ///< mean(upper pair) − mean(lower pair)
  double spread_lower = 0.0;  ///< intra-pair spreads
  double spread_upper = 0.0;
  double isolation = 0.0;  ///< distance from `center` to the fifth-nearest level
};

/// Locates the four levels nearest `center`. Throws CrowdedWindow if any of
/// them lies outside `window` of `center` or a fifth level lies inside.
ExactSplitting exact_splitting(const Eigen::VectorXd& spectrum, double center, double window);
ExactSplitting exact_splitting(const SupercellModel& model, double center, double window);

struct ScanRow {
  double lambda = 0.0;
  double delta_pt = 0.0;
  double delta_exact = 0.0;
  double residual = 0.0;
};

struct PowerLawFit {
  double prefactor = 0.0;
  double exponent = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit of log y = log A + p log x over points with x, y > 0.
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct ScanResult {
  std::vector<ScanRow> rows;
  PowerLawFit fit;
};

/// Evaluates `pipeline(λ) → (ΔE_PT, ΔE_exact)` for each strength (in
/// parallel, rows kept in input order) and fits residual = A·λ^p. Throws
/// OutOfRange with fewer than four positive strengths.
ScanResult linearity_scan(const std::vector<double>& lambdas,
                          const std::function<std::pair<double, double>(double)>& pipeline);

}  // namespace blochdegen
