#include "blochdegen/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "blochdegen/errors.hpp"

namespace blochdegen {

void PhysicalConstants::validate() const {
  if (!(hbar > 0.0) || !(mass > 0.0) || !(charge > 0.0) || !(c_light > 0.0)) {
    throw Error(ErrorKind::ConfigError, "physical constants must be strictly positive");
  }
  if (!(so_scale >= 0.0) || !std::isfinite(so_scale)) {
    throw Error(ErrorKind::ConfigError, "so_scale must be finite and non-negative");
  }
}

std::array<Vec3, 3> reciprocal_basis(const Vec3& a1, const Vec3& a2, const Vec3& a3) {
  const double det = a1.dot(a2.cross(a3));
  if (!(std::abs(det) >= 1e-12)) {
    throw Error(ErrorKind::SingularLattice, "|det[a1,a2,a3]| = " + std::to_string(std::abs(det)));
  }
  const double scale = kTwoPi / det;
  return {scale * a2.cross(a3), scale * a3.cross(a1), scale * a1.cross(a2)};
}

TriclinicLattice::TriclinicLattice(const Vec3& a1, const Vec3& a2, const Vec3& a3)
    : direct_{a1, a2, a3}, reciprocal_(reciprocal_basis(a1, a2, a3)) {
  if (a1.dot(a2.cross(a3)) <= 0.0) {
    throw Error(ErrorKind::SingularLattice, "lattice vectors must form a right-handed triple");
  }
}

TriclinicLattice TriclinicLattice::default_triclinic() {
  return TriclinicLattice(Vec3(1.0, 0.0, 0.0), Vec3(0.5, 1.1, 0.0), Vec3(0.2, 0.3, 1.3));
}

TriclinicLattice TriclinicLattice::cubic(double a) {
  return TriclinicLattice(Vec3(a, 0.0, 0.0), Vec3(0.0, a, 0.0), Vec3(0.0, 0.0, a));
}

Mat3 TriclinicLattice::direct_matrix() const {
  Mat3 m;
  m << direct_[0], direct_[1], direct_[2];
  return m;
}

Mat3 TriclinicLattice::reciprocal_matrix() const {
  Mat3 m;
  m << reciprocal_[0], reciprocal_[1], reciprocal_[2];
  return m;
}

double TriclinicLattice::volume() const { return direct_[0].dot(direct_[1].cross(direct_[2])); }

Vec3 TriclinicLattice::cartesian_k(const Vec3& f) const {
  return f[0] * reciprocal_[0] + f[1] * reciprocal_[1] + f[2] * reciprocal_[2];
}

Vec3 TriclinicLattice::cartesian_g(const GIndex& g) const {
  return cartesian_k(Vec3(g[0], g[1], g[2]));
}

Vec3 TriclinicLattice::cartesian_r(const Vec3& f) const {
  return f[0] * direct_[0] + f[1] * direct_[1] + f[2] * direct_[2];
}

Vec3 TriclinicLattice::fractional_r(const Vec3& r) const {
  // xᵢ = bᵢ·r / 2π
  return Vec3(reciprocal_[0].dot(r), reciprocal_[1].dot(r), reciprocal_[2].dot(r)) / kTwoPi;
}

TriclinicLattice TriclinicLattice::supercell(const GIndex& n) const {
  for (int v : n) {
    if (v < 1) throw Error(ErrorKind::OutOfRange, "supercell repetitions must be positive");
  }
  return TriclinicLattice(n[0] * direct_[0], n[1] * direct_[1], n[2] * direct_[2]);
}

GVectorSet::GVectorSet(std::vector<GIndex> gvectors) : g_(std::move(gvectors)) {
  index_.reserve(g_.size());
  for (std::size_t i = 0; i < g_.size(); ++i) index_.emplace(g_[i], i);
  negated_.resize(g_.size());
  negation_closed_ = true;
  for (std::size_t i = 0; i < g_.size(); ++i) {
    auto it = index_.find(-g_[i]);
    if (it == index_.end()) {
      negation_closed_ = false;
      negated_[i] = i;
    } else {
      negated_[i] = it->second;
    }
  }
}

std::optional<std::size_t> GVectorSet::find(const GIndex& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GIndex GVectorSet::extent() const {
  GIndex e{0, 0, 0};
  for (const auto& g : g_) {
    for (int d = 0; d < 3; ++d) e[d] = std::max(e[d], std::abs(g[d]));
  }
  return e;
}

void sort_gvectors(const TriclinicLattice& lattice, std::vector<GIndex>& gvectors) {
  std::vector<std::pair<double, GIndex>> keyed;
  keyed.reserve(gvectors.size());
  for (const auto& g : gvectors) keyed.emplace_back(lattice.cartesian_g(g).norm(), g);
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t i = 0; i < keyed.size(); ++i) gvectors[i] = keyed[i].second;
}

PlaneWaveBasis build_basis(const TriclinicLattice& lattice, const Vec3& kpoint, double gmax) {
  if (!(gmax > 0.0)) throw Error(ErrorKind::OutOfRange, "gmax must be positive");
  // |nᵢ| = |G·aᵢ| / 2π ≤ gmax |aᵢ| / 2π
  GIndex bound{};
  for (int i = 0; i < 3; ++i) bound[i] = static_cast<int>(std::floor(gmax * lattice.a(i).norm() / kTwoPi)) + 1;

  std::vector<GIndex> selected;
  for (int n1 = -bound[0]; n1 <= bound[0]; ++n1) {
    for (int n2 = -bound[1]; n2 <= bound[1]; ++n2) {
      for (int n3 = -bound[2]; n3 <= bound[2]; ++n3) {
        const GIndex g{n1, n2, n3};
        if (lattice.cartesian_g(g).norm() <= gmax) selected.push_back(g);
      }
    }
  }
  sort_gvectors(lattice, selected);
  return PlaneWaveBasis{kpoint, gmax, std::make_shared<const GVectorSet>(std::move(selected))};
}

Vec3 commensurate_k(const GIndex& m, const GIndex& n_bvk) {
  Vec3 k;
  for (int i = 0; i < 3; ++i) {
    if (n_bvk[i] < 1 || m[i] < 0 || m[i] >= n_bvk[i]) {
      throw Error(ErrorKind::OutOfRange, "Born-von Karman index m must satisfy 0 <= m_i < n_i");
    }
    k[i] = static_cast<double>(m[i]) / static_cast<double>(n_bvk[i]);
  }
  return k;
}

std::optional<GIndex> nearest_integer(const Vec3& x, double tol) {
  GIndex out{};
  for (int i = 0; i < 3; ++i) {
    const double r = std::round(x[i]);
    if (std::abs(x[i] - r) > tol) return std::nullopt;
    out[i] = static_cast<int>(r);
  }
  return out;
}

}  // namespace blochdegen
