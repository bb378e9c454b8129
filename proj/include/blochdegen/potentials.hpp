#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blochdegen/core_model.hpp"

namespace blochdegen {

enum class Parity { Even, Odd, None };

const char* parity_name(Parity p) noexcept;

/// Real periodic field stored as Fourier amplitudes V(q) on a reciprocal
/// grid. Indices are in units of bᵢ / grid_scaleᵢ of the lattice the
/// potential is paired with: grid_scale = (1,1,1) for unit-cell periodic
/// fields, N for fields periodic only over an N supercell.
class FourierPotential {
 public:
  explicit FourierPotential(Parity parity = Parity::None, GIndex grid_scale = {1, 1, 1})
      : parity_(parity), grid_scale_(grid_scale) {}

  Parity parity() const { return parity_; }
  const GIndex& grid_scale() const { return grid_scale_; }
  const std::map<GIndex, Complex>& amplitudes() const { return amplitudes_; }
  bool empty() const { return amplitudes_.empty(); }

  Complex at(const GIndex& q) const {
    auto it = amplitudes_.find(q);
    return it == amplitudes_.end() ? Complex{} : it->second;
  }
  void set(const GIndex& q, Complex value);
  /// Sets V(q) and V(-q) = conj(V(q)).
  void set_pair(const GIndex& q, Complex value);

  FourierPotential scaled(double factor) const;
  /// Same field re-indexed on a grid `factor` times finer (q → factor∘q);
  /// used when a unit-cell field is expressed on a supercell lattice.
  FourierPotential refined(const GIndex& factor) const;
  /// Same amplitudes, different grid_scale label.
  FourierPotential with_grid_scale(const GIndex& grid_scale) const;
  /// Sum of two fields on the same grid. The parity tag is kept only if both agree.
  friend FourierPotential operator+(const FourierPotential& a, const FourierPotential& b);

  /// max_q |V(-q) - conj(V(q))|.
  double real_field_residual() const;
  /// Throws NonHermitianAmplitudes if the real-field condition fails beyond
  /// 1e-12, ParityViolation if the parity tag is not honoured.
  void validate() const;

 private:
  Parity parity_;
  GIndex grid_scale_;
  std::map<GIndex, Complex> amplitudes_;
};

/// Seeded shell-limited series on the `shell_count` lowest nonzero |G|
/// shells with |V(G)| = amplitude_scale · decay^shell. Even fields get real
/// amplitudes, Odd fields imaginary ones, None a random phase.
FourierPotential random_fourier_potential(const TriclinicLattice& lattice, std::uint64_t seed, Parity parity,
                                          int shell_count, double amplitude_scale, double decay);

struct ParityResidual {
  double even = 0.0;  ///< max_G |V(-G) - V(G)|
  double odd = 0.0;   ///< max_G |V(-G) + V(G)|
};
ParityResidual parity_residual(const FourierPotential& potential);

/// V(r) = Σ V(q) e^{iq·r} at Cartesian points. Throws NonHermitianAmplitudes
/// if the field is not real.
std::vector<double> evaluate_real(const FourierPotential& potential, const TriclinicLattice& lattice,
                                  std::span<const Vec3> points);

enum class ExternalKind { Sawtooth, GaussianBump };

const char* external_kind_name(ExternalKind k) noexcept;

/// Translation-breaking field periodized over a supercell. Only harmonics
/// off the unit-cell reciprocal lattice are kept, so the field has no
/// lattice-periodic component.
struct ExternalPotential {
  ExternalKind kind = ExternalKind::Sawtooth;
  Vec3 direction = Vec3::UnitX();  ///< Cartesian unit vector u_E
  GIndex direction_index{1, 0, 0};  ///< supercell reciprocal direction
  double strength = 0.0;            ///< Hartree
  GIndex supercell{8, 1, 1};
  Vec3 center = Vec3::Zero();  ///< bump centre, fractional supercell coordinates
  double width = 1.0;          ///< bump width, bohr
  /// Fourier amplitudes on the supercell grid (grid_scale = supercell).
  FourierPotential amplitudes;
};

/// Zero-mean sawtooth V'(r) = λ (frac(t) - 1/2) with t = Q₁·r / 2π, where
/// Q₁ = Σ hᵢ bᵢ/Nᵢ and h = `direction_index`. Amplitudes V'(nQ₁) = iλ/(2πn)
/// for 0 < |n| ≤ harmonics, skipping n with nh on the unit-cell grid.
ExternalPotential sawtooth_external(const TriclinicLattice& unit_lattice, const GIndex& direction_index,
                                    double strength, const GIndex& supercell, int harmonics);

/// Periodized Gaussian bump λ Σ_R' exp(-|r - c - R'|² / 2w²) with its mean
/// removed, on the supercell grid points within `harmonic_box` that are
/// not unit-cell reciprocal vectors.
ExternalPotential gaussian_bump_external(const TriclinicLattice& unit_lattice, const Vec3& center_fractional,
                                         double width, double strength, const GIndex& supercell,
                                         const GIndex& harmonic_box);

}  // namespace blochdegen
