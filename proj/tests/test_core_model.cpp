#include <doctest.h>

#include <algorithm>
#include <set>

#include "blochdegen/core_model.hpp"
#include "blochdegen/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace blochdegen;

using test_support::default_direct;
using test_support::kind_of;

TEST_CASE("reciprocal basis agrees with an LU solve") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const Mat3 expected = oracle::reciprocal_by_lu(default_direct());
  CHECK((lattice.reciprocal_matrix() - expected).cwiseAbs().maxCoeff() < 1e-12);
  const Mat3 dot = lattice.direct_matrix().transpose() * lattice.reciprocal_matrix();
  CHECK((dot - kTwoPi * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degenerate and left-handed lattices are rejected") {
  CHECK(kind_of([] { TriclinicLattice(Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(0, 0, 1)); }) == ErrorKind::SingularLattice);
  CHECK(kind_of([] { TriclinicLattice(Vec3(0, 1, 0), Vec3(1, 0, 0), Vec3(0, 0, 1)); }) == ErrorKind::SingularLattice);
  CHECK(kind_of([] { reciprocal_basis(Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)); }) == ErrorKind::SingularLattice);
}

TEST_CASE("plane-wave basis matches brute-force enumeration") {
  const auto lattice = TriclinicLattice::default_triclinic();
  for (double gmax : {10.0, 16.0, 23.0}) {
    const auto basis = build_basis(lattice, Vec3(0.137, 0.211, 0.093), gmax);
    const auto expected = oracle::enumerate_gvectors(default_direct(), gmax);
    const std::set<GIndex> got(basis.gvectors->gvectors().begin(), basis.gvectors->gvectors().end());
    CHECK(got.size() == basis.size());
    CHECK(got == expected);
    CHECK(basis.gvectors->negation_closed());
  }
  // The default basis used throughout has roughly 300 plane waves.
  CHECK(build_basis(lattice, Vec3::Zero(), 23.0).size() == oracle::enumerate_gvectors(default_direct(), 23.0).size());
}

TEST_CASE("basis is ordered by |G| and indexes its negations") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const auto basis = build_basis(lattice, Vec3::Zero(), 16.0);
  const auto& gs = *basis.gvectors;
  CHECK(gs[0] == GIndex{0, 0, 0});
  for (std::size_t i = 1; i < gs.size(); ++i) {
    CHECK(lattice.cartesian_g(gs[i - 1]).norm() <= lattice.cartesian_g(gs[i]).norm() + 1e-12);
  }
  for (std::size_t i = 0; i < gs.size(); ++i) {
    CHECK(gs[gs.negated(i)] == -gs[i]);
    CHECK(gs.find(gs[i]) == i);
  }
  CHECK_FALSE(gs.find({99, 0, 0}).has_value());
  CHECK(kind_of([&] { build_basis(lattice, Vec3::Zero(), 0.0); }) == ErrorKind::OutOfRange);
}

TEST_CASE("coordinate conversions round-trip") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const Vec3 f(0.3, -0.7, 1.9);
  CHECK((lattice.fractional_r(lattice.cartesian_r(f)) - f).norm() < 1e-13);
  CHECK((lattice.cartesian_k(Vec3(1, 2, 3)) - lattice.cartesian_g({1, 2, 3})).norm() < 1e-13);
  CHECK(lattice.volume() == doctest::Approx(default_direct().determinant()).epsilon(1e-14));
}

TEST_CASE("supercell reciprocal vectors are bᵢ / Nᵢ") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const GIndex n{8, 3, 2};
  const auto super = lattice.supercell(n);
  for (int i = 0; i < 3; ++i) {
    CHECK((super.b(i) - lattice.b(i) / n[std::size_t(i)]).norm() < 1e-13);
    CHECK((super.a(i) - lattice.a(i) * n[std::size_t(i)]).norm() < 1e-13);
  }
  CHECK(kind_of([&] { lattice.supercell({0, 1, 1}); }) == ErrorKind::OutOfRange);
}

TEST_CASE("Born-von Karman k-points") {
  const Vec3 k = commensurate_k({1, 0, 3}, {8, 1, 4});
  CHECK(k[0] == doctest::Approx(0.125));
  CHECK(k[1] == 0.0);
  CHECK(k[2] == doctest::Approx(0.75));
  CHECK(kind_of([] { commensurate_k({8, 0, 0}, {8, 1, 1}); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([] { commensurate_k({-1, 0, 0}, {8, 1, 1}); }) == ErrorKind::OutOfRange);
}

TEST_CASE("nearest integer triple") {
  CHECK(nearest_integer(Vec3(1.0, -2.0 + 1e-12, 3.0)) == GIndex{1, -2, 3});
  CHECK_FALSE(nearest_integer(Vec3(1.0, 0.5, 0.0)).has_value());
}

TEST_CASE("physical constants") {
  PhysicalConstants pc;
  CHECK(pc.so_prefactor() == doctest::Approx(1.0 / (4.0 * 137.035999 * 137.035999)));
  pc.so_scale = 1e4;
  CHECK(pc.so_prefactor() == doctest::Approx(1e4 / (4.0 * 137.035999 * 137.035999)));
  pc.so_scale = -1.0;
  CHECK(kind_of([&] { pc.validate(); }) == ErrorKind::ConfigError);
  pc.so_scale = 1.0;
  pc.mass = 0.0;
  CHECK(kind_of([&] { pc.validate(); }) == ErrorKind::ConfigError);
}
