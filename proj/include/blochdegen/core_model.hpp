#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace blochdegen {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Integer coordinates (n1, n2, n3) of a reciprocal lattice vector
/// G = n1 b1 + n2 b2 + n3 b3.
using GIndex = std::array<int, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline GIndex operator+(const GIndex& a, const GIndex& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline GIndex operator-(const GIndex& a, const GIndex& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline GIndex operator-(const GIndex& a) { return {-a[0], -a[1], -a[2]}; }

struct GIndexHash {
  std::size_t operator()(const GIndex& g) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int v : g) {
      h ^= static_cast<std::size_t>(static_cast<unsigned>(v));
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// Atomic (Hartree) units: hbar = m = e = 1. `so_scale` multiplies the
/// spin-orbit prefactor hbar / (4 m^2 c^2).
struct PhysicalConstants {
  double hbar = 1.0;
  double mass = 1.0;
  double charge = 1.0;
  double c_light = 137.035999;
  double so_scale = 1.0;

  void validate() const;
  double so_prefactor() const { return so_scale * hbar / (4.0 * mass * mass * c_light * c_light); }
};

/// aᵢ·bⱼ = 2π δᵢⱼ. Throws SingularLattice when |det[a1,a2,a3]| < 1e-12.
std::array<Vec3, 3> reciprocal_basis(const Vec3& a1, const Vec3& a2, const Vec3& a3);

/// General three-dimensional lattice with no symmetry constraints.
class TriclinicLattice {
 public:
  /// Throws SingularLattice for |det| < 1e-12 or a left-handed triple.
  TriclinicLattice(const Vec3& a1, const Vec3& a2, const Vec3& a3);

  /// a1=(1,0,0), a2=(0.5,1.1,0), a3=(0.2,0.3,1.3) bohr.
  static TriclinicLattice default_triclinic();
  static TriclinicLattice cubic(double a = 1.0);

  const Vec3& a(int i) const { return direct_[static_cast<std::size_t>(i)]; }
  const Vec3& b(int i) const { return reciprocal_[static_cast<std::size_t>(i)]; }
  /// Columns are a1, a2, a3.
  Mat3 direct_matrix() const;
  /// Columns are b1, b2, b3.
  Mat3 reciprocal_matrix() const;
  double volume() const;

  Vec3 cartesian_k(const Vec3& fractional) const;
  Vec3 cartesian_g(const GIndex& g) const;
  Vec3 cartesian_r(const Vec3& fractional) const;
  /// Lattice coordinates of a Cartesian position, r = Σ xᵢ aᵢ.
  Vec3 fractional_r(const Vec3& cartesian) const;

  /// Lattice with aᵢ' = Nᵢ aᵢ.
  TriclinicLattice supercell(const GIndex& repetitions) const;

 private:
  std::array<Vec3, 3> direct_;
  std::array<Vec3, 3> reciprocal_;
};

/// Immutable, indexed list of reciprocal lattice vectors shared by every
/// state and matrix expressed on it.
class GVectorSet {
 public:
  explicit GVectorSet(std::vector<GIndex> gvectors);

  std::size_t size() const { return g_.size(); }
  const GIndex& operator[](std::size_t i) const { return g_[i]; }
  const std::vector<GIndex>& gvectors() const { return g_; }
  std::optional<std::size_t> find(const GIndex& g) const;

  bool negation_closed() const { return negation_closed_; }
  /// Position of -G for the G stored at `i`. Only valid when negation_closed().
  std::size_t negated(std::size_t i) const { return negated_[i]; }
  /// Largest |nᵢ| over the set, per axis.
  GIndex extent() const;

 private:
  std::vector<GIndex> g_;
  std::unordered_map<GIndex, std::size_t, GIndexHash> index_;
  std::vector<std::size_t> negated_;
  bool negation_closed_ = false;
};

/// Plane waves e^{i(k+G)·r} with |G| ≤ gmax. The cutoff acts on |G| rather
/// than |k+G| so that the set is closed under G → -G for every k.
struct PlaneWaveBasis {
  Vec3 kpoint = Vec3::Zero();  ///< fractional reciprocal coordinates
  double gmax = 0.0;
  std::shared_ptr<const GVectorSet> gvectors;

  std::size_t size() const { return gvectors->size(); }
  const GIndex& operator[](std::size_t i) const { return (*gvectors)[i]; }
  /// Same G list, crystal momentum -k.
  PlaneWaveBasis negated_k() const { return PlaneWaveBasis{-kpoint, gmax, gvectors}; }
};

/// Sorts by (|G|, n1, n2, n3).
void sort_gvectors(const TriclinicLattice& lattice, std::vector<GIndex>& gvectors);

PlaneWaveBasis build_basis(const TriclinicLattice& lattice, const Vec3& kpoint, double gmax);

/// Born-von Karman k-point k = Σ (mᵢ/nᵢ) bᵢ, returned in fractional
/// coordinates. Throws OutOfRange unless 0 ≤ mᵢ < nᵢ.
Vec3 commensurate_k(const GIndex& m, const GIndex& n_bvk);

/// Integer triple nearest to `x` if every component is within `tol` of it.
std::optional<GIndex> nearest_integer(const Vec3& x, double tol = 1e-9);

}  // namespace blochdegen
