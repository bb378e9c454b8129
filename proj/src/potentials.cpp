#include "blochdegen/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "blochdegen/errors.hpp"

namespace blochdegen {

const char* parity_name(Parity p) noexcept {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    case Parity::None: return "none";
  }
  return "none";
}

const char* external_kind_name(ExternalKind k) noexcept {
  return k == ExternalKind::Sawtooth ? "sawtooth" : "gaussian_bump";
}

void FourierPotential::set(const GIndex& q, Complex value) { amplitudes_[q] = value; }

void FourierPotential::set_pair(const GIndex& q, Complex value) {
  amplitudes_[q] = value;
  amplitudes_[-q] = std::conj(value);
}

FourierPotential FourierPotential::scaled(double factor) const {
  FourierPotential out(parity_, grid_scale_);
  for (const auto& [q, v] : amplitudes_) out.amplitudes_.emplace(q, factor * v);
  return out;
}

FourierPotential FourierPotential::refined(const GIndex& factor) const {
  FourierPotential out(parity_, {grid_scale_[0] * factor[0], grid_scale_[1] * factor[1], grid_scale_[2] * factor[2]});
  for (const auto& [q, v] : amplitudes_) {
    out.amplitudes_.emplace(GIndex{q[0] * factor[0], q[1] * factor[1], q[2] * factor[2]}, v);
  }
  return out;
}

FourierPotential FourierPotential::with_grid_scale(const GIndex& grid_scale) const {
  FourierPotential out = *this;
  out.grid_scale_ = grid_scale;
  return out;
}

FourierPotential operator+(const FourierPotential& a, const FourierPotential& b) {
  if (a.grid_scale_ != b.grid_scale_) {
    throw Error(ErrorKind::BasisMismatch, "cannot add potentials defined on different grids");
  }
  FourierPotential out(a.parity_ == b.parity_ ? a.parity_ : Parity::None, a.grid_scale_);
  out.amplitudes_ = a.amplitudes_;
  for (const auto& [q, v] : b.amplitudes_) out.amplitudes_[q] += v;
  return out;
}

double FourierPotential::real_field_residual() const {
  double r = 0.0;
  for (const auto& [q, v] : amplitudes_) r = std::max(r, std::abs(at(-q) - std::conj(v)));
  return r;
}

void FourierPotential::validate() const {
  constexpr double tol = 1e-12;
  const double real_res = real_field_residual();
  if (real_res > tol) {
    throw Error(ErrorKind::NonHermitianAmplitudes,
                "V(-q) != conj(V(q)), residual " + std::to_string(real_res));
  }
  const ParityResidual pr = parity_residual(*this);
  if (parity_ == Parity::Even && pr.even > tol) {
    throw Error(ErrorKind::ParityViolation, "potential tagged even has odd part " + std::to_string(pr.even));
  }
  if (parity_ == Parity::Odd && pr.odd > tol) {
    throw Error(ErrorKind::ParityViolation, "potential tagged odd has even part " + std::to_string(pr.odd));
  }
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Canonical member of the pair {G, -G}: first nonzero component positive.
bool is_canonical(const GIndex& g) {
  for (int v : g) {
    if (v != 0) return v > 0;
  }
  return false;
}

}  // namespace

FourierPotential random_fourier_potential(const TriclinicLattice& lattice, std::uint64_t seed, Parity parity,
                                          int shell_count, double amplitude_scale, double decay) {
  if (shell_count < 1 || !(amplitude_scale > 0.0) || !(decay > 0.0 && decay < 1.0)) {
    throw Error(ErrorKind::OutOfRange, "random potential needs shells >= 1, scale > 0, 0 < decay < 1");
  }
  constexpr double shell_tol = 1e-9;

  // Grow the enumeration sphere until it holds `shell_count` complete shells.
  double radius = 1.01 * std::min({lattice.b(0).norm(), lattice.b(1).norm(), lattice.b(2).norm()});
  std::vector<std::vector<GIndex>> shells;
  for (;;) {
    const PlaneWaveBasis sphere = build_basis(lattice, Vec3::Zero(), radius);
    shells.clear();
    double current = -1.0;
    for (const auto& g : sphere.gvectors->gvectors()) {
      const double norm = lattice.cartesian_g(g).norm();
      if (norm == 0.0) continue;
      if (shells.empty() || norm > current * (1.0 + shell_tol)) {
        shells.emplace_back();
        current = norm;
      }
      shells.back().push_back(g);
    }
    if (static_cast<int>(shells.size()) >= shell_count) break;
    radius *= 1.5;
  }

  FourierPotential out(parity);
  std::mt19937_64 rng(seed);
  for (int s = 0; s < shell_count; ++s) {
    std::vector<GIndex> members;
    for (const auto& g : shells[static_cast<std::size_t>(s)]) {
      if (is_canonical(g)) members.push_back(g);
    }
    std::sort(members.begin(), members.end());
    const double magnitude = amplitude_scale * std::pow(decay, s);
    for (const auto& g : members) {
      const double sign = (rng() >> 63) != 0 ? 1.0 : -1.0;
      Complex value;
      switch (parity) {
        case Parity::Even: value = Complex(sign * magnitude, 0.0); break;
        case Parity::Odd: value = Complex(0.0, sign * magnitude); break;
        case Parity::None: value = std::polar(magnitude, kTwoPi * unit_uniform(rng)); break;
      }
      out.set_pair(g, value);
    }
  }
  return out;
}

ParityResidual parity_residual(const FourierPotential& potential) {
  ParityResidual r;
  for (const auto& [q, v] : potential.amplitudes()) {
    const Complex minus = potential.at(-q);
    r.even = std::max(r.even, std::abs(minus - v));
    r.odd = std::max(r.odd, std::abs(minus + v));
  }
  return r;
}

std::vector<double> evaluate_real(const FourierPotential& potential, const TriclinicLattice& lattice,
                                  std::span<const Vec3> points) {
  const double res = potential.real_field_residual();
  if (res > 1e-12) {
    throw Error(ErrorKind::NonHermitianAmplitudes, "real-field residual " + std::to_string(res));
  }
  const GIndex& s = potential.grid_scale();
  std::vector<std::pair<Vec3, Complex>> terms;
  terms.reserve(potential.amplitudes().size());
  for (const auto& [q, v] : potential.amplitudes()) {
    terms.emplace_back(lattice.cartesian_k(Vec3(double(q[0]) / s[0], double(q[1]) / s[1], double(q[2]) / s[2])), v);
  }
  std::vector<double> values;
  values.reserve(points.size());
  for (const auto& r : points) {
    Complex sum{};
    for (const auto& [g, v] : terms) sum += v * std::polar(1.0, g.dot(r));
    values.push_back(sum.real());
  }
  return values;
}

namespace {

// Supercell grid points that are unit-cell reciprocal vectors carry the
// lattice-periodic part of a field; external fields keep only the rest.
bool on_unit_grid(const GIndex& q, const GIndex& supercell) {
  for (int i = 0; i < 3; ++i) {
    if (q[i] % supercell[i] != 0) return false;
  }
  return true;
}

}  // namespace

ExternalPotential sawtooth_external(const TriclinicLattice& unit_lattice, const GIndex& direction_index,
                                    double strength, const GIndex& supercell, int harmonics) {
  if (!(strength >= 0.0)) throw Error(ErrorKind::OutOfRange, "external strength must be non-negative");
  if (direction_index == GIndex{0, 0, 0}) throw Error(ErrorKind::OutOfRange, "sawtooth direction is zero");
  if (harmonics < 1) throw Error(ErrorKind::OutOfRange, "sawtooth needs at least one harmonic");
  for (int n : supercell) {
    if (n < 1) throw Error(ErrorKind::OutOfRange, "supercell repetitions must be positive");
  }
  ExternalPotential ext;
  ext.kind = ExternalKind::Sawtooth;
  ext.strength = strength;
  ext.supercell = supercell;
  ext.direction_index = direction_index;
  const Vec3 q1 = unit_lattice.cartesian_k(Vec3(double(direction_index[0]) / supercell[0],
                                                double(direction_index[1]) / supercell[1],
                                                double(direction_index[2]) / supercell[2]));
  ext.direction = q1.normalized();
  ext.amplitudes = FourierPotential(Parity::Odd, supercell);
  if (strength == 0.0) return ext;
  for (int n = 1; n <= harmonics; ++n) {
    const GIndex q{n * direction_index[0], n * direction_index[1], n * direction_index[2]};
    if (on_unit_grid(q, supercell)) continue;
    ext.amplitudes.set_pair(q, Complex(0.0, strength / (kTwoPi * n)));
  }
  return ext;
}

ExternalPotential gaussian_bump_external(const TriclinicLattice& unit_lattice, const Vec3& center_fractional,
                                         double width, double strength, const GIndex& supercell,
                                         const GIndex& harmonic_box) {
  if (!(strength >= 0.0) || !(width > 0.0)) {
    throw Error(ErrorKind::OutOfRange, "gaussian bump needs strength >= 0 and width > 0");
  }
  const TriclinicLattice super = unit_lattice.supercell(supercell);
  ExternalPotential ext;
  ext.kind = ExternalKind::GaussianBump;
  ext.strength = strength;
  ext.supercell = supercell;
  ext.center = center_fractional;
  ext.width = width;
  const Vec3 offset = super.cartesian_r(center_fractional);
  ext.direction = offset.norm() > 0.0 ? Vec3(offset.normalized()) : Vec3(Vec3::UnitX());
  ext.direction_index = {0, 0, 0};
  ext.amplitudes = FourierPotential(Parity::None, supercell);
  if (strength == 0.0) return ext;
  const double prefactor = strength / super.volume() * std::pow(kTwoPi * width * width, 1.5);
  for (int q1 = -harmonic_box[0]; q1 <= harmonic_box[0]; ++q1) {
    for (int q2 = -harmonic_box[1]; q2 <= harmonic_box[1]; ++q2) {
      for (int q3 = -harmonic_box[2]; q3 <= harmonic_box[2]; ++q3) {
        const GIndex q{q1, q2, q3};
        if (on_unit_grid(q, supercell)) continue;
        const double qq = super.cartesian_g(q).squaredNorm();
        const double phase = -kTwoPi * (q1 * center_fractional[0] + q2 * center_fractional[1] + q3 * center_fractional[2]);
        ext.amplitudes.set(q, std::polar(prefactor * std::exp(-0.5 * qq * width * width), phase));
      }
    }
  }
  return ext;
}

}  // namespace blochdegen
