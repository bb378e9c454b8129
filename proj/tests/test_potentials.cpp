#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "blochdegen/potentials.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace blochdegen;
using test_support::kind_of;

namespace {

oracle::RealField field_of(const FourierPotential& v, const TriclinicLattice& lattice) {
  oracle::RealField f;
  f.reciprocal = lattice.reciprocal_matrix();
  for (int i = 0; i < 3; ++i) f.reciprocal.col(i) /= v.grid_scale()[std::size_t(i)];
  for (const auto& [q, a] : v.amplitudes()) f.terms.emplace_back(q, a);
  return f;
}

}  // namespace

TEST_CASE("random even and odd series have the tagged symmetry") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const auto even = random_fourier_potential(lattice, 11, Parity::Even, 6, 0.2, 0.7);
  const auto odd = random_fourier_potential(lattice, 12, Parity::Odd, 6, 0.02, 0.7);
  CHECK(parity_residual(even).even == 0.0);
  CHECK(parity_residual(odd).odd == 0.0);
  CHECK(parity_residual(even).odd > 0.0);
  CHECK(even.real_field_residual() == 0.0);
  CHECK(odd.real_field_residual() == 0.0);
  for (const auto& [g, v] : even.amplitudes()) CHECK(v.imag() == 0.0);
  for (const auto& [g, v] : odd.amplitudes()) CHECK(v.real() == 0.0);
  CHECK(even.at({0, 0, 0}) == Complex{});
  CHECK_NOTHROW(even.validate());
  CHECK_NOTHROW(odd.validate());
}

TEST_CASE("shell magnitudes follow scale * decay^shell") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const auto v = random_fourier_potential(lattice, 3, Parity::Even, 5, 0.2, 0.5);
  // In a triclinic cell every ±G pair is its own shell, so there are ten amplitudes.
  REQUIRE(v.amplitudes().size() == 10);
  std::vector<std::pair<double, double>> by_length;
  for (const auto& [g, a] : v.amplitudes()) by_length.emplace_back(lattice.cartesian_g(g).norm(), std::abs(a));
  std::sort(by_length.begin(), by_length.end());
  for (std::size_t i = 0; i < by_length.size(); ++i) {
    CHECK(by_length[i].second == doctest::Approx(0.2 * std::pow(0.5, double(i / 2))).epsilon(1e-14));
  }
}

TEST_CASE("random series are reproducible per seed") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const auto a = random_fourier_potential(lattice, 5, Parity::None, 4, 0.1, 0.8);
  const auto b = random_fourier_potential(lattice, 5, Parity::None, 4, 0.1, 0.8);
  const auto c = random_fourier_potential(lattice, 6, Parity::None, 4, 0.1, 0.8);
  CHECK(a.amplitudes() == b.amplitudes());
  CHECK(a.amplitudes() != c.amplitudes());
  CHECK(a.real_field_residual() < 1e-15);
  CHECK(kind_of([&] { random_fourier_potential(lattice, 1, Parity::Even, 0, 0.1, 0.5); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { random_fourier_potential(lattice, 1, Parity::Even, 3, 0.1, 1.5); }) == ErrorKind::OutOfRange);
}

TEST_CASE("validation names the broken condition") {
  FourierPotential lonely(Parity::None);
  lonely.set({1, 0, 0}, Complex(0.3, 0.1));
  CHECK(kind_of([&] { lonely.validate(); }) == ErrorKind::NonHermitianAmplitudes);

  FourierPotential mislabeled(Parity::Even);
  mislabeled.set_pair({1, 0, 0}, Complex(0.0, 0.2));
  CHECK(kind_of([&] { mislabeled.validate(); }) == ErrorKind::ParityViolation);

  FourierPotential mislabeled_odd(Parity::Odd);
  mislabeled_odd.set_pair({0, 1, 0}, Complex(0.2, 0.0));
  CHECK(kind_of([&] { mislabeled_odd.validate(); }) == ErrorKind::ParityViolation);
}

TEST_CASE("real-space evaluation matches an explicit Fourier sum and parity") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const auto even = random_fourier_potential(lattice, 21, Parity::Even, 6, 0.2, 0.7);
  const auto odd = random_fourier_potential(lattice, 22, Parity::Odd, 6, 0.02, 0.7);
  const std::vector<Vec3> pts{Vec3(0.1, 0.2, 0.3), Vec3(-0.4, 0.9, 1.7), Vec3(2.0, -1.0, 0.5)};
  std::vector<Vec3> neg;
  for (const Vec3& p : pts) neg.push_back(-p);
  const auto ve = evaluate_real(even, lattice, pts), ve_neg = evaluate_real(even, lattice, neg);
  const auto vo = evaluate_real(odd, lattice, pts), vo_neg = evaluate_real(odd, lattice, neg);
  const auto fe = field_of(even, lattice), fo = field_of(odd, lattice);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(ve[i] == doctest::Approx(fe(pts[i])).epsilon(1e-12));
    CHECK(vo[i] == doctest::Approx(fo(pts[i])).epsilon(1e-12));
    CHECK(std::abs(ve[i] - ve_neg[i]) < 1e-14);
    CHECK(std::abs(vo[i] + vo_neg[i]) < 1e-14);
  }
  FourierPotential lonely(Parity::None);
  lonely.set({1, 0, 0}, Complex(0.3, 0.1));
  CHECK(kind_of([&] { evaluate_real(lonely, lattice, pts); }) == ErrorKind::NonHermitianAmplitudes);
}

TEST_CASE("grid helpers") {
  FourierPotential v(Parity::Even);
  v.set_pair({1, -1, 0}, Complex(0.5, 0.0));
  const auto r = v.refined({8, 1, 2});
  CHECK(r.at({8, -1, 0}) == Complex(0.5, 0.0));
  CHECK(r.at({-8, 1, 0}) == Complex(0.5, 0.0));
  CHECK(r.grid_scale() == GIndex{8, 1, 2});
  CHECK(r.with_grid_scale({1, 1, 1}).grid_scale() == GIndex{1, 1, 1});
  CHECK(v.scaled(-2.0).at({1, -1, 0}) == Complex(-1.0, 0.0));

  FourierPotential w(Parity::Odd);
  w.set_pair({0, 0, 1}, Complex(0.0, 0.1));
  const auto sum = v + w;
  CHECK(sum.parity() == Parity::None);
  CHECK(sum.amplitudes().size() == 4);
  CHECK(kind_of([&] { (void)(v + r); }) == ErrorKind::BasisMismatch);
}

TEST_CASE("sawtooth amplitudes match quadrature of the real-space profile") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const double lambda = 1e-3;
  const GIndex n{8, 1, 1};
  const auto ext = sawtooth_external(lattice, {1, 0, 0}, lambda, n, 40);
  CHECK(ext.amplitudes.parity() == Parity::Odd);
  CHECK(ext.amplitudes.grid_scale() == n);
  CHECK_NOTHROW(ext.amplitudes.validate());
  for (int h = -40; h <= 40; ++h) {
    const Complex got = ext.amplitudes.at({h, 0, 0});
    if (h == 0 || h % 8 == 0) {
      CHECK(got == Complex{});
      continue;
    }
    const Complex want = oracle::sawtooth_coefficient(lambda, h);
    CHECK(std::abs(got - want) < 1e-13 * std::abs(want) + 1e-18);
  }
  CHECK(ext.amplitudes.at({41, 0, 0}) == Complex{});
  CHECK((ext.direction - lattice.b(0).normalized()).norm() < 1e-14);
}

TEST_CASE("external fields have no lattice-periodic part") {
  const auto lattice = TriclinicLattice::default_triclinic();
  const GIndex n{4, 2, 1};
  const auto saw = sawtooth_external(lattice, {1, 1, 0}, 2e-3, n, 30);
  const auto bump = gaussian_bump_external(lattice, Vec3(0.3, 0.6, 0.5), 0.7, 1e-3, n, {6, 3, 2});
  for (const auto* ext : {&saw, &bump}) {
    for (const auto& [q, a] : ext->amplitudes.amplitudes()) {
      CHECK_FALSE((q[0] % n[0] == 0 && q[1] % n[1] == 0 && q[2] % n[2] == 0));
    }
    // Averaging over the unit-cell translations inside the supercell removes the field.
    const Vec3 r0(0.37, -0.21, 0.55);
    std::vector<Vec3> pts;
    for (int i = 0; i < n[0]; ++i) {
      for (int j = 0; j < n[1]; ++j) pts.push_back(r0 + double(i) * lattice.a(0) + double(j) * lattice.a(1));
    }
    const auto values = evaluate_real(ext->amplitudes, lattice, pts);
    double mean = 0.0, scale = 0.0;
    for (double v : values) mean += v / double(values.size()), scale = std::max(scale, std::abs(v));
    CHECK(scale > 0.0);
    CHECK(std::abs(mean) < 1e-12 * scale);
  }
  CHECK(bump.amplitudes.real_field_residual() < 1e-18);
  CHECK(bump.kind == ExternalKind::GaussianBump);
}

TEST_CASE("external field argument checks") {
  const auto lattice = TriclinicLattice::default_triclinic();
  CHECK(kind_of([&] { sawtooth_external(lattice, {0, 0, 0}, 1e-3, {8, 1, 1}, 10); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { sawtooth_external(lattice, {1, 0, 0}, -1.0, {8, 1, 1}, 10); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { sawtooth_external(lattice, {1, 0, 0}, 1e-3, {8, 1, 1}, 0); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([&] { gaussian_bump_external(lattice, Vec3::Zero(), 0.0, 1e-3, {2, 1, 1}, {2, 2, 2}); }) ==
        ErrorKind::OutOfRange);
  CHECK(sawtooth_external(lattice, {1, 0, 0}, 0.0, {8, 1, 1}, 10).amplitudes.empty());
}
