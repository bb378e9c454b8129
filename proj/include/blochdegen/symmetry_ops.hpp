#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "blochdegen/core_model.hpp"

namespace blochdegen {

/// Two-component plane-wave spinor ψ(r) = Σ_{G,σ} c(G,σ) e^{i(k+G)·r} |σ⟩.
/// Coefficients use the Hamiltonian layout σ·N + iG with σ quantized along
/// z; `spin_axis` names the axis u that S_u refers to.
struct SpinorWave {
  Vec3 kpoint = Vec3::Zero();  ///< fractional
  std::shared_ptr<const GVectorSet> gvectors;
  Eigen::VectorXcd coefficients;
  Vec3 spin_axis = Vec3::UnitZ();

  std::size_t orbital_size() const { return gvectors->size(); }
  double norm() const { return coefficients.norm(); }
};

/// Wraps an eigenvector of a spinful Hamiltonian assembled on `basis`.
SpinorWave spinor_from_vector(const PlaneWaveBasis& basis, const Eigen::VectorXcd& coefficients,
                              const Vec3& spin_axis = Vec3::UnitZ());
/// orbital ⊗ spinor.
SpinorWave spinor_product(const PlaneWaveBasis& basis, const Eigen::VectorXcd& orbital,
                          const Eigen::Vector2cd& spinor, const Vec3& spin_axis = Vec3::UnitZ());

/// S_u = (1/2) u·σ in the σ_z basis. Throws OutOfRange unless |u| = 1 within 1e-12.
Eigen::Matrix2cd spin_matrix(const Vec3& u);
/// Eigenspinors of S_u: χ₊ = (cos θ/2, e^{iφ} sin θ/2) and χ₋ = −iσ_y χ₊*.
Eigen::Vector2cd spinor_up(const Vec3& u);
Eigen::Vector2cd spinor_down(const Vec3& u);

/// c(G,σ) → e^{−i(k+G)·R} c(G,σ) for R = Σ nᵢ aᵢ.
SpinorWave apply_translation(const SpinorWave& state, const GIndex& n);
/// Cartesian R; throws NonLatticeVector unless R is a lattice vector within 1e-9.
SpinorWave apply_translation(const SpinorWave& state, const TriclinicLattice& lattice, const Vec3& r_cartesian);
/// k → −k, c'(G,σ) = c(−G,σ).
SpinorWave apply_inversion(const SpinorWave& state);
/// K = (−iσ_y)∘conj: k → −k, c'(G,↑) = −c(−G,↓)*, c'(G,↓) = c(−G,↑)*.
SpinorWave apply_time_reversal(const SpinorWave& state);
/// C = I∘K by its direct formula: k kept, c'(G,↑) = −c(G,↓)*, c'(G,↓) = c(G,↑)*.
SpinorWave apply_conjugation(const SpinorWave& state);
/// S_u acting on the spinor index.
SpinorWave apply_spin(const SpinorWave& state);
/// Component j of the momentum operator ħ(k+G)ⱼ (Cartesian).
SpinorWave apply_momentum(const SpinorWave& state, const TriclinicLattice& lattice, int j, double hbar = 1.0);

/// Antiunitary candidate that conjugates and spin-flips without G → −G.
/// It satisfies K² = −1 but does not reverse momentum; used as a negative control.
SpinorWave apply_time_reversal_without_momentum_flip(const SpinorWave& state);

/// ⟨ψ|S_u|ψ⟩ / ⟨ψ|ψ⟩ along the state's own spin axis.
double spin_expectation(const SpinorWave& state);
/// ‖a − b‖ after checking that k and the G-set agree; infinity otherwise.
double state_distance(const SpinorWave& a, const SpinorWave& b);
/// ‖H v − E v‖ for a state expressed on the matrix's basis.
double eigen_residual(const Eigen::MatrixXcd& h, const SpinorWave& state, double energy);

/// Complex-normal coefficients, normalized. Requires a negation-closed set.
SpinorWave random_spinor(const PlaneWaveBasis& basis, std::uint64_t seed, const Vec3& spin_axis = Vec3::UnitZ());

/// Maximum residuals of the operator identities over random states.
struct SymmetryReport {
  std::uint64_t seed = 0;
  std::size_t basis_size = 0;
  std::size_t state_count = 0;
  Vec3 kpoint = Vec3::Zero();
  Vec3 spin_axis = Vec3::UnitZ();
  std::map<std::string, double> residuals;

  double max_residual() const;
  /// Name of the largest residual.
  std::string worst() const;
};

struct IdentityOptions {
  std::size_t state_count = 50;
  Vec3 spin_axis = Vec3::UnitZ();
  /// Translation vectors R = Σ nᵢ aᵢ exercised by the translation identities.
  std::vector<GIndex> translations{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, -2, 3}};
  /// Time-reversal implementation under test.
  std::function<SpinorWave(const SpinorWave&)> time_reversal = apply_time_reversal;
};

/// Residuals reported (each a maximum over states and translations):
///   bloch_residual            ‖T_R ψ − e^{−ik·R} ψ‖
///   iti_residual              ‖I T_R ψ − T_{−R} I ψ‖
///   kt_commutation_residual   ‖K T_R ψ − T_R K ψ‖
///   k2_residual               ‖K² ψ + ψ‖
///   i2_residual               ‖I² ψ − ψ‖
///   ks_anticomm_residual      ‖K S_u ψ + S_u K ψ‖
///   kp_anticomm_residual      ‖K pⱼ ψ + pⱼ K ψ‖ / ‖pⱼ ψ‖
///   ip_anticomm_residual      ‖I pⱼ ψ + pⱼ I ψ‖ / ‖pⱼ ψ‖
///   c_composition_residual    ‖C ψ − I K ψ‖
///   norm_residual_{translation,inversion,time_reversal,conjugation}
SymmetryReport verify_identities(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, std::uint64_t seed,
                                 const IdentityOptions& options = {});

}  // namespace blochdegen
