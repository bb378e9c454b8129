#include "blochdegen/hamiltonian.hpp"

#include <string>

#include "blochdegen/errors.hpp"

namespace blochdegen {

namespace {

constexpr Complex kI{0.0, 1.0};

// Offset of the potential-grid index between two Bloch sectors, or nothing
// when k_bra - k_ket is off the grid and every matrix element vanishes.
std::optional<GIndex> grid_offset(const FourierPotential& v, const Vec3& k_bra, const Vec3& k_ket) {
  const GIndex& s = v.grid_scale();
  const Vec3 dk = k_bra - k_ket;
  return nearest_integer(Vec3(dk[0] * s[0], dk[1] * s[1], dk[2] * s[2]));
}

GIndex scaled_difference(const GIndex& offset, const GIndex& s, const GIndex& g, const GIndex& gp) {
  return {offset[0] + s[0] * (g[0] - gp[0]), offset[1] + s[1] * (g[1] - gp[1]), offset[2] + s[2] * (g[2] - gp[2])};
}

Vec3 grid_cartesian(const TriclinicLattice& lattice, const GIndex& q, const GIndex& s) {
  return lattice.cartesian_k(Vec3(double(q[0]) / s[0], double(q[1]) / s[1], double(q[2]) / s[2]));
}

}  // namespace

double HamiltonianMatrix::hermiticity_residual() const {
  if (matrix.size() == 0) return 0.0;
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

void require_parity(const FourierPotential& v, Parity expected, const char* role) {
  if (v.parity() != expected) {
    throw Error(ErrorKind::ParityViolation, std::string(role) + " must be tagged " + parity_name(expected) +
                                                ", got " + parity_name(v.parity()));
  }
  v.validate();
}

FourierPotential electrostatic_energy(const FourierPotential& phi, const PhysicalConstants& constants) {
  return phi.scaled(-constants.charge);
}

Eigen::MatrixXcd potential_block(const TriclinicLattice& /*lattice*/, const Vec3& k_bra, const GVectorSet& bra,
                                 const Vec3& k_ket, const GVectorSet& ket, const FourierPotential& v) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(bra.size()),
                                                static_cast<Eigen::Index>(ket.size()));
  const auto offset = grid_offset(v, k_bra, k_ket);
  if (!offset || v.empty()) return out;
  const GIndex& s = v.grid_scale();
  for (std::size_t i = 0; i < bra.size(); ++i) {
    for (std::size_t j = 0; j < ket.size(); ++j) {
      out(Eigen::Index(i), Eigen::Index(j)) = v.at(scaled_difference(*offset, s, bra[i], ket[j]));
    }
  }
  return out;
}

Eigen::MatrixXcd spin_orbit_block(const TriclinicLattice& lattice, const Vec3& k_bra, const GVectorSet& bra,
                                  const Vec3& k_ket, const GVectorSet& ket, const FourierPotential& v,
                                  const PhysicalConstants& constants) {
  const auto nb = static_cast<Eigen::Index>(bra.size());
  const auto nk = static_cast<Eigen::Index>(ket.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2 * nb, 2 * nk);
  const auto offset = grid_offset(v, k_bra, k_ket);
  const double pref = constants.so_prefactor();
  if (!offset || v.empty() || pref == 0.0) return out;
  const GIndex& s = v.grid_scale();

  std::vector<Vec3> momenta(ket.size());
  for (std::size_t j = 0; j < ket.size(); ++j) {
    momenta[j] = constants.hbar * lattice.cartesian_k(k_ket + Vec3(ket[j][0], ket[j][1], ket[j][2]));
  }
  for (std::size_t i = 0; i < bra.size(); ++i) {
    for (std::size_t j = 0; j < ket.size(); ++j) {
      const GIndex q = scaled_difference(*offset, s, bra[i], ket[j]);
      const Complex amp = v.at(q);
      if (amp == Complex{}) continue;
      const Vec3 cross = grid_cartesian(lattice, q, s).cross(momenta[j]);
      const Complex f = pref * kI * amp;
      const Complex wx = f * cross[0], wy = f * cross[1], wz = f * cross[2];
      const auto r = Eigen::Index(i), c = Eigen::Index(j);
      out(r, c) = wz;
      out(r, nk + c) = wx - kI * wy;
      out(nb + r, c) = wx + kI * wy;
      out(nb + r, nk + c) = -wz;
    }
  }
  return out;
}

Eigen::MatrixXcd so_block(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, const FourierPotential& v,
                          const PhysicalConstants& constants) {
  return spin_orbit_block(lattice, basis.kpoint, *basis.gvectors, basis.kpoint, *basis.gvectors, v, constants);
}

Eigen::VectorXd kinetic_diagonal(const TriclinicLattice& lattice, const PlaneWaveBasis& basis,
                                 const PhysicalConstants& constants) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(basis.size()));
  const double f = constants.hbar * constants.hbar / (2.0 * constants.mass);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const GIndex& g = basis[i];
    t[Eigen::Index(i)] = f * lattice.cartesian_k(basis.kpoint + Vec3(g[0], g[1], g[2])).squaredNorm();
  }
  return t;
}

HamiltonianMatrix assemble(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, const ModelTerms& terms,
                           const PhysicalConstants& constants, bool spinful) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  const GVectorSet& g = *basis.gvectors;
  const Vec3& k = basis.kpoint;

  Eigen::MatrixXcd orbital = kinetic_diagonal(lattice, basis, constants).cast<Complex>().asDiagonal();
  if (terms.v0) orbital += potential_block(lattice, k, g, k, g, *terms.v0);
  std::optional<FourierPotential> phi_energy;
  if (terms.phi) {
    phi_energy = electrostatic_energy(*terms.phi, constants).scaled(terms.delta_scale);
    orbital += potential_block(lattice, k, g, k, g, *phi_energy);
  }
  if (terms.external) orbital += potential_block(lattice, k, g, k, g, *terms.external);

  HamiltonianMatrix h;
  h.kpoint = k;
  h.spinful = spinful;
  h.includes_odd_potential = terms.phi != nullptr;
  h.includes_external = terms.external != nullptr;
  if (!spinful) {
    h.matrix = std::move(orbital);
    return h;
  }
  h.matrix = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  h.matrix.topLeftCorner(n, n) = orbital;
  h.matrix.bottomRightCorner(n, n) = orbital;
  if (terms.so_v0 && terms.v0) {
    h.matrix += terms.delta_scale * so_block(lattice, basis, *terms.v0, constants);
    h.includes_so_even = true;
  }
  if (terms.so_phi && phi_energy) {
    h.matrix += so_block(lattice, basis, *phi_energy, constants);
    h.includes_so_odd = true;
  }
  if (terms.so_external && terms.external) h.matrix += so_block(lattice, basis, *terms.external, constants);
  return h;
}

HamiltonianMatrix assemble_h0(const TriclinicLattice& lattice, const PlaneWaveBasis& basis,
                              const FourierPotential& v0, const PhysicalConstants& constants) {
  require_parity(v0, Parity::Even, "v0");
  ModelTerms terms;
  terms.v0 = &v0;
  return assemble(lattice, basis, terms, constants, false);
}

HamiltonianMatrix assemble_spinful(const TriclinicLattice& lattice, const PlaneWaveBasis& basis,
                                   const FourierPotential& v0, const FourierPotential* phi, bool include_u1,
                                   bool include_u2, const PhysicalConstants& constants) {
  require_parity(v0, Parity::Even, "v0");
  if (phi) require_parity(*phi, Parity::Odd, "phi");
  ModelTerms terms;
  terms.v0 = &v0;
  terms.phi = phi;
  terms.so_v0 = include_u1;
  terms.so_phi = include_u2;
  return assemble(lattice, basis, terms, constants, true);
}

}  // namespace blochdegen
