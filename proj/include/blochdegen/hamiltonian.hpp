#pragma once

#include <Eigen/Dense>

#include "blochdegen/core_model.hpp"
#include "blochdegen/potentials.hpp"

namespace blochdegen {

/// Dense Hamiltonian in the plane-wave (spinor) basis. Spinful matrices use
/// the block layout index = σ·N + iG with σ = 0 (↑z), 1 (↓z).
struct HamiltonianMatrix {
  Vec3 kpoint = Vec3::Zero();
  bool spinful = false;
  Eigen::MatrixXcd matrix;
  bool includes_so_even = false;        ///< U₁
  bool includes_so_odd = false;         ///< U₂
  bool includes_odd_potential = false;  ///< -eφ
  bool includes_external = false;       ///< V'

  Eigen::Index dimension() const { return matrix.rows(); }
  double hermiticity_residual() const;
};

/// Which terms enter an assembled Hamiltonian. Pointers are non-owning and
/// may be null; `phi` is the electrostatic potential and enters as -e·φ.
struct ModelTerms {
  const FourierPotential* v0 = nullptr;
  const FourierPotential* phi = nullptr;
  const FourierPotential* external = nullptr;
  bool so_v0 = false;
  bool so_phi = false;
  bool so_external = false;
  /// Perturbation bookkeeping factor applied to -eφ, U₁ and U₂ together.
  double delta_scale = 1.0;
};

/// ⟨k_bra+G|V|k_ket+G'⟩ for G in `bra`, G' in `ket`. The block vanishes
/// identically unless k_bra - k_ket lies on the potential's reciprocal grid.
Eigen::MatrixXcd potential_block(const TriclinicLattice& lattice, const Vec3& k_bra, const GVectorSet& bra,
                                 const Vec3& k_ket, const GVectorSet& ket, const FourierPotential& v);

/// Spin-orbit operator so_prefactor · σ·(∇V × p) between spinor plane waves:
/// element[(G,σ),(G',σ')] = pref · i V(q) [q × ħ(k_ket+G')] · ⟨σ|σ⃗|σ'⟩,
/// q = k_bra + G - k_ket - G'. Returns a (2·|bra|) × (2·|ket|) block.
Eigen::MatrixXcd spin_orbit_block(const TriclinicLattice& lattice, const Vec3& k_bra, const GVectorSet& bra,
                                  const Vec3& k_ket, const GVectorSet& ket, const FourierPotential& v,
                                  const PhysicalConstants& constants);

/// Same-k spin-orbit matrix on `basis`.
Eigen::MatrixXcd so_block(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, const FourierPotential& v,
                          const PhysicalConstants& constants);

/// Kinetic energy ħ²|k+G|²/2m on the diagonal.
Eigen::VectorXd kinetic_diagonal(const TriclinicLattice& lattice, const PlaneWaveBasis& basis,
                                 const PhysicalConstants& constants);

HamiltonianMatrix assemble(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, const ModelTerms& terms,
                           const PhysicalConstants& constants, bool spinful);

/// Spinless H₀ = p²/2m + V₀. Throws ParityViolation unless v0 is Even.
HamiltonianMatrix assemble_h0(const TriclinicLattice& lattice, const PlaneWaveBasis& basis,
                              const FourierPotential& v0, const PhysicalConstants& constants = {});

/// H = (p²/2m + V₀ - eφ)⊗σ₀ + [U₁] + [U₂]. Throws ParityViolation unless v0
/// is Even and phi (when given) is Odd.
HamiltonianMatrix assemble_spinful(const TriclinicLattice& lattice, const PlaneWaveBasis& basis,
                                   const FourierPotential& v0, const FourierPotential* phi, bool include_u1,
                                   bool include_u2, const PhysicalConstants& constants);

/// Potential energy -e·φ of an electrostatic potential φ.
FourierPotential electrostatic_energy(const FourierPotential& phi, const PhysicalConstants& constants);

/// Raises ParityViolation when the tag or the amplitudes disagree with `expected`.
void require_parity(const FourierPotential& v, Parity expected, const char* role);

}  // namespace blochdegen
