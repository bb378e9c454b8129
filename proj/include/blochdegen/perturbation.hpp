#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "blochdegen/hamiltonian.hpp"
#include "blochdegen/symmetry_ops.hpp"

namespace blochdegen {

/// Four degenerate states {|k,s⟩, |k,−s⟩, |−k,s⟩, |−k,−s⟩} of the spinless
/// H₀ band `band` dressed with S_u eigenspinors. The −k orbital is I applied
/// to the k orbital, so with χ₋ = −iσ_y χ₊* the time-reversal operator maps
/// |1⟩ → |4⟩, |2⟩ → −|3⟩, |3⟩ → |2⟩, |4⟩ → −|1⟩.
struct Quartet {
  std::size_t band = 0;
  double energy = 0.0;  ///< E⁰ₖ
  double gap = 0.0;     ///< distance to the nearest other spinless level at k
  Vec3 kpoint = Vec3::Zero();
  Vec3 spin_axis = Vec3::UnitZ();
  PlaneWaveBasis basis;  ///< at +k
  Eigen::VectorXcd orbital;
  std::array<SpinorWave, 4> states;

  /// max |⟨i|j⟩ − δᵢⱼ|.
  double gram_residual() const;
  /// max |⟨S_u⟩ᵢ − (+½, −½, +½, −½)ᵢ|.
  double spin_residual() const;
};

/// Throws AccidentalDegeneracy when 2k is a reciprocal lattice vector (±k
/// coincide) or when band n is within 10·tol_deg of a neighbouring level.
Quartet build_quartet(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, const FourierPotential& v0,
                      std::size_t band, const Vec3& spin_axis = Vec3::UnitZ(), const PhysicalConstants& constants = {},
                      double tol_deg = 1e-9);

/// Multiplies each quartet state by a random unit phase.
Quartet rephased(const Quartet& q, std::uint64_t seed);

/// Perturbations entering the secular problem. `phi` is the electrostatic
/// potential (energy −eφ); U₁ and U₂ are the spin-orbit terms of V₀ and −eφ.
struct PerturbationTerms {
  const FourierPotential* v0 = nullptr;
  const FourierPotential* phi = nullptr;
  const ExternalPotential* external = nullptr;
  bool u1 = false;
  bool u2 = false;
  bool phi_orbital = false;
  /// Evaluate the spin-orbit elements a′, b′, c′, d′ of V′ (never assembled).
  bool external_so = false;
  /// Perturbation bookkeeping factor applied to -eφ, U₁ and U₂ together.
  double delta_scale = 1.0;
};

struct SecularMatrix {
  Complex a1, b1, c1, d1;
  Complex a2, b2, c2, d2;
  Complex alpha, beta;
  Complex beta_prime;
  Complex a_ext, b_ext, c_ext, d_ext;  ///< a′, b′, c′, d′
  bool has_external = false;
  bool has_external_so = false;
  /// Rows/cols [a,c,d,0 / c*,b,0,d / d*,0,b,−c / 0,d*,−c*,a] with
  /// a = a1+a2+α, b = b1+b2+α, c = c1+c2, d = d1+d2+β+β′.
  Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Zero();
  /// ⟨i|δV|j⟩ evaluated element by element for the same terms.
  Eigen::Matrix4cd projected = Eigen::Matrix4cd::Zero();

  double hermiticity_residual() const;
  /// max |projected − matrix|.
  double layout_residual() const;
  /// max(|a2|, |c2|, floor), the scale of the spin-orbit splitting.
  double so_scale(double floor = 1e-8) const;
};

/// Builds the assembled matrix from the named components.
Eigen::Matrix4cd assemble_secular(const SecularMatrix& sm);

/// Throws IncommensurateK if an external field is present and N∘k is not integral.
SecularMatrix secular_elements(const TriclinicLattice& lattice, const Quartet& quartet, const PerturbationTerms& terms,
                               const PhysicalConstants& constants = {});

/// Element-by-element ⟨i|δV|j⟩ over four states for the given terms (all assembled terms).
Eigen::Matrix4cd projected_matrix(const TriclinicLattice& lattice, const std::array<SpinorWave, 4>& states,
                                  const PerturbationTerms& terms, const PhysicalConstants& constants = {});

/// Residuals of the symmetry relations among components:
/// a1_minus_b1, c1_abs, d1_imag, a2_plus_b2, d2_real, alpha_abs, beta_real, and
/// with `translation_invariant` also d1_abs, d2_abs, beta_abs.
std::map<std::string, double> selection_residuals(const SecularMatrix& sm, bool translation_invariant);

struct PerturbationOutcome {
  double e1_plus = 0.0;
  double e1_minus = 0.0;
  double splitting = 0.0;
  Eigen::Vector4d eigenvalues = Eigen::Vector4d::Zero();  ///< of the assembled 4×4
  double closed_form_residual = 0.0;
  double doublet_residual = 0.0;  ///< max intra-doublet spread
  bool fourfold = false;
  std::map<std::string, double> selection;
};

/// E1± = a1 ± sqrt(a2² + |c2|² + |d1+d2+β+β′|²) checked against the 4×4
/// eigenvalues. Throws SelectionRuleViolation when a1 = b1, c1 = 0, α = 0
/// fail beyond tol·max(1, |δV| scale).
PerturbationOutcome first_order(const SecularMatrix& sm, double tol = 1e-12, double tol_deg = 1e-9);

/// 2 sqrt(a2² + |c2|² + |β′|²). Throws RegimeViolation when max(|a′|,|b′|,|c′|,|d′|) > 1% of |β′|.
double splitting_pedial(const SecularMatrix& sm);
/// 2|β′|. Throws RegimeViolation unless a2 = c2 = 0 within tol and the a′…d′ guard holds.
double splitting_pinacoidal(const SecularMatrix& sm, double tol = 1e-12);

/// Projector-map residuals: k4_preserves, i4_exchanges, c4_exchanges, k4_squared.
/// Throws DegenerateSplit when the doublet gap is ≤ 10·tol_deg.
std::map<std::string, double> subspace_maps(const SecularMatrix& sm, double tol_deg = 1e-9);

/// Real 4×4 matrix M with K₄ = M∘conj in the quartet basis.
Eigen::Matrix4d quartet_time_reversal();
/// Permutation 1↔3, 2↔4.
Eigen::Matrix4d quartet_inversion();

}  // namespace blochdegen
