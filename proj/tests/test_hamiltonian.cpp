#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "blochdegen/hamiltonian.hpp"
#include "blochdegen/spectrum.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace blochdegen;
using test_support::kind_of;

namespace {

const TriclinicLattice kLattice = TriclinicLattice::default_triclinic();
const Vec3 kGeneric(0.137, 0.211, 0.093);

FourierPotential even_v0() { return random_fourier_potential(kLattice, 1, Parity::Even, 6, 0.2, 0.7); }
FourierPotential odd_phi() { return random_fourier_potential(kLattice, 2, Parity::Odd, 6, 0.02, 0.7); }

}  // namespace

TEST_CASE("assembled Hamiltonians are Hermitian for every term combination") {
  const auto basis = build_basis(kLattice, kGeneric, 12.0);
  const auto v0 = even_v0(), phi = odd_phi();
  PhysicalConstants pc;
  pc.so_scale = 1e4;
  for (int mask = 0; mask < 8; ++mask) {
    ModelTerms t;
    t.v0 = &v0;
    t.phi = (mask & 1) ? &phi : nullptr;
    t.so_v0 = mask & 2;
    t.so_phi = mask & 4;
    const auto h = assemble(kLattice, basis, t, pc, true);
    CHECK(h.dimension() == Eigen::Index(2 * basis.size()));
    CHECK(h.hermiticity_residual() <= 1e-12 * std::max(1.0, h.matrix.cwiseAbs().maxCoeff()));
    CHECK(h.includes_odd_potential == bool(mask & 1));
    CHECK(h.includes_so_even == bool(mask & 2));
  }
}

TEST_CASE("kinetic energy is |k+G|^2 / 2 with the independently built reciprocal basis") {
  const auto basis = build_basis(kLattice, kGeneric, 10.0);
  const auto t = kinetic_diagonal(kLattice, basis, {});
  const Mat3 b = oracle::reciprocal_by_lu(test_support::default_direct());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Vec3 kg = b * (kGeneric + Vec3(basis[i][0], basis[i][1], basis[i][2]));
    CHECK(t[Eigen::Index(i)] == doctest::Approx(0.5 * kg.squaredNorm()).epsilon(1e-13));
  }
}

TEST_CASE("empty lattice reproduces free-electron energies") {
  const auto basis = build_basis(kLattice, kGeneric, 10.0);
  const FourierPotential zero(Parity::Even);
  const auto h = assemble_h0(kLattice, basis, zero);
  const auto e = eigenvalues(h.matrix);
  std::vector<double> free;
  const Mat3 b = oracle::reciprocal_by_lu(test_support::default_direct());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    free.push_back(0.5 * (b * (kGeneric + Vec3(basis[i][0], basis[i][1], basis[i][2]))).squaredNorm());
  }
  std::sort(free.begin(), free.end());
  for (std::size_t i = 0; i < free.size(); ++i) CHECK(e[Eigen::Index(i)] == doctest::Approx(free[i]).epsilon(1e-12));
}

TEST_CASE("potential block entries are V(G - G') and vanish between unrelated k") {
  const auto basis = build_basis(kLattice, kGeneric, 8.0);
  const auto v0 = even_v0();
  const auto& g = *basis.gvectors;
  const auto block = potential_block(kLattice, kGeneric, g, kGeneric, g, v0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(block(Eigen::Index(i), Eigen::Index(j)) == v0.at(g[i] - g[j]));
    }
  }
  const auto cross = potential_block(kLattice, kGeneric, g, Vec3(0.3, 0.0, 0.0), g, v0);
  CHECK(cross.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spin-orbit elements match a finite-difference real-space evaluation") {
  FourierPotential v(Parity::None);
  v.set_pair({1, 0, 0}, Complex(0.15, -0.05));
  v.set_pair({0, 1, -1}, Complex(-0.07, 0.02));
  v.set_pair({1, 1, 0}, Complex(0.04, 0.09));
  oracle::RealField field;
  field.reciprocal = oracle::reciprocal_by_lu(test_support::default_direct());
  for (const auto& [q, a] : v.amplitudes()) field.terms.emplace_back(q, a);

  PhysicalConstants pc;
  pc.so_scale = 1e4;
  const std::vector<GIndex> bras{{0, 0, 0}, {1, 0, 0}, {1, 1, -1}};
  const std::vector<GIndex> kets{{0, 0, 0}, {0, -1, 1}, {0, 0, 1}};
  const GVectorSet bra(bras), ket(kets);
  const auto block = spin_orbit_block(kLattice, kGeneric, bra, kGeneric, ket, v, pc);
  for (std::size_t i = 0; i < bras.size(); ++i) {
    for (std::size_t j = 0; j < kets.size(); ++j) {
      const Eigen::Matrix2cd want = oracle::spin_orbit_element(test_support::default_direct(), field, kGeneric, bras[i],
                                                               kets[j], pc.so_prefactor(), 8);
      const auto ni = Eigen::Index(bras.size()), nj = Eigen::Index(kets.size());
      Eigen::Matrix2cd got;
      got << block(Eigen::Index(i), Eigen::Index(j)), block(Eigen::Index(i), nj + Eigen::Index(j)),
          block(ni + Eigen::Index(i), Eigen::Index(j)), block(ni + Eigen::Index(i), nj + Eigen::Index(j));
      CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1e-6, want.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("perturbation bookkeeping factor is linear") {
  const auto basis = build_basis(kLattice, kGeneric, 10.0);
  const auto v0 = even_v0(), phi = odd_phi();
  PhysicalConstants pc;
  pc.so_scale = 1e4;
  auto h = [&](double s) {
    ModelTerms t;
    t.v0 = &v0;
    t.phi = &phi;
    t.so_v0 = t.so_phi = true;
    t.delta_scale = s;
    return assemble(kLattice, basis, t, pc, true).matrix;
  };
  const Eigen::MatrixXcd h0 = h(0.0), h1 = h(1.0), h3 = h(0.3);
  CHECK(((h3 - h0) - 0.3 * (h1 - h0)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((h1 - h0).cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("parity requirements of the convenience builders") {
  const auto basis = build_basis(kLattice, kGeneric, 8.0);
  const auto v0 = even_v0(), phi = odd_phi();
  CHECK(kind_of([&] { assemble_h0(kLattice, basis, phi); }) == ErrorKind::ParityViolation);
  CHECK(kind_of([&] { assemble_spinful(kLattice, basis, v0, &v0, true, true, {}); }) == ErrorKind::ParityViolation);
  const auto h = assemble_spinful(kLattice, basis, v0, &phi, true, true, {});
  CHECK(h.spinful);
  CHECK(h.includes_so_odd);
  const auto energy = electrostatic_energy(phi, {});
  for (const auto& [q, a] : phi.amplitudes()) CHECK(energy.at(q) == -a);
}

TEST_CASE("spin-orbit coupling vanishes without a potential gradient") {
  const auto basis = build_basis(kLattice, kGeneric, 8.0);
  const FourierPotential zero(Parity::Even);
  PhysicalConstants pc;
  pc.so_scale = 1e4;
  CHECK(so_block(kLattice, basis, zero, pc).cwiseAbs().maxCoeff() == 0.0);
  pc.so_scale = 0.0;
  CHECK(so_block(kLattice, basis, even_v0(), pc).cwiseAbs().maxCoeff() == 0.0);
}
