#include "blochdegen/symmetry_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "blochdegen/errors.hpp"
#include "blochdegen/spectrum.hpp"

namespace blochdegen {

namespace {

void require_negation_closed(const SpinorWave& state) {
  if (!state.gvectors || !state.gvectors->negation_closed()) {
    throw Error(ErrorKind::BasisMismatch, "operator needs a G-set closed under negation");
  }
}

SpinorWave with_coefficients(const SpinorWave& state, const Vec3& k, Eigen::VectorXcd c) {
  return SpinorWave{k, state.gvectors, std::move(c), state.spin_axis};
}

// ‖a + b‖, or infinity when the two states live in different sectors.
double anti_distance(const SpinorWave& a, const SpinorWave& b) {
  SpinorWave negated = b;
  negated.coefficients = -b.coefficients;
  return state_distance(a, negated);
}

void bump(std::map<std::string, double>& table, const std::string& name, double value) {
  auto [it, inserted] = table.emplace(name, value);
  if (!inserted) it->second = std::max(it->second, value);
}

}  // namespace

SpinorWave spinor_from_vector(const PlaneWaveBasis& basis, const Eigen::VectorXcd& coefficients,
                              const Vec3& spin_axis) {
  if (coefficients.size() != static_cast<Eigen::Index>(2 * basis.size())) {
    throw Error(ErrorKind::BasisMismatch, "spinor length does not match 2 x basis size");
  }
  return SpinorWave{basis.kpoint, basis.gvectors, coefficients, spin_axis};
}

SpinorWave spinor_product(const PlaneWaveBasis& basis, const Eigen::VectorXcd& orbital,
                          const Eigen::Vector2cd& spinor, const Vec3& spin_axis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  if (orbital.size() != n) throw Error(ErrorKind::BasisMismatch, "orbital length does not match basis size");
  Eigen::VectorXcd c(2 * n);
  c.head(n) = spinor[0] * orbital;
  c.tail(n) = spinor[1] * orbital;
  return SpinorWave{basis.kpoint, basis.gvectors, std::move(c), spin_axis};
}

Eigen::Matrix2cd spin_matrix(const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-12) throw Error(ErrorKind::OutOfRange, "spin axis must be a unit vector");
  Eigen::Matrix2cd s;
  s << Complex(u[2], 0.0), Complex(u[0], -u[1]), Complex(u[0], u[1]), Complex(-u[2], 0.0);
  return 0.5 * s;
}

Eigen::Vector2cd spinor_up(const Vec3& u) {
  if (std::abs(u.norm() - 1.0) > 1e-12) throw Error(ErrorKind::OutOfRange, "spin axis must be a unit vector");
  const double theta = std::acos(std::clamp(u[2], -1.0, 1.0));
  const double phi = std::atan2(u[1], u[0]);
  return {Complex(std::cos(0.5 * theta), 0.0), std::polar(std::sin(0.5 * theta), phi)};
}

Eigen::Vector2cd spinor_down(const Vec3& u) {
  const Eigen::Vector2cd up = spinor_up(u);
  return {-std::conj(up[1]), std::conj(up[0])};
}

SpinorWave apply_translation(const SpinorWave& state, const GIndex& n) {
  const std::size_t ng = state.orbital_size();
  Eigen::VectorXcd c = state.coefficients;
  const Vec3 nv(n[0], n[1], n[2]);
  for (std::size_t i = 0; i < ng; ++i) {
    const GIndex& g = (*state.gvectors)[i];
    const Vec3 kg = state.kpoint + Vec3(g[0], g[1], g[2]);
    const Complex phase = std::polar(1.0, -kTwoPi * kg.dot(nv));
    c[Eigen::Index(i)] *= phase;
    c[Eigen::Index(ng + i)] *= phase;
  }
  return with_coefficients(state, state.kpoint, std::move(c));
}

SpinorWave apply_translation(const SpinorWave& state, const TriclinicLattice& lattice, const Vec3& r_cartesian) {
  const auto n = nearest_integer(lattice.fractional_r(r_cartesian));
  if (!n) throw Error(ErrorKind::NonLatticeVector, "translation is not a lattice vector");
  return apply_translation(state, *n);
}

SpinorWave apply_inversion(const SpinorWave& state) {
  require_negation_closed(state);
  const std::size_t ng = state.orbital_size();
  Eigen::VectorXcd c(state.coefficients.size());
  for (std::size_t i = 0; i < ng; ++i) {
    const auto j = Eigen::Index(state.gvectors->negated(i));
    c[Eigen::Index(i)] = state.coefficients[j];
    c[Eigen::Index(ng + i)] = state.coefficients[Eigen::Index(ng) + j];
  }
  return with_coefficients(state, -state.kpoint, std::move(c));
}

SpinorWave apply_time_reversal(const SpinorWave& state) {
  require_negation_closed(state);
  const std::size_t ng = state.orbital_size();
  Eigen::VectorXcd c(state.coefficients.size());
  for (std::size_t i = 0; i < ng; ++i) {
    const auto j = Eigen::Index(state.gvectors->negated(i));
    c[Eigen::Index(i)] = -std::conj(state.coefficients[Eigen::Index(ng) + j]);
    c[Eigen::Index(ng + i)] = std::conj(state.coefficients[j]);
  }
  return with_coefficients(state, -state.kpoint, std::move(c));
}

SpinorWave apply_conjugation(const SpinorWave& state) {
  const auto ng = static_cast<Eigen::Index>(state.orbital_size());
  Eigen::VectorXcd c(state.coefficients.size());
  c.head(ng) = -state.coefficients.tail(ng).conjugate();
  c.tail(ng) = state.coefficients.head(ng).conjugate();
  return with_coefficients(state, state.kpoint, std::move(c));
}

SpinorWave apply_time_reversal_without_momentum_flip(const SpinorWave& state) {
  SpinorWave out = apply_conjugation(state);
  out.kpoint = -state.kpoint;
  return out;
}

SpinorWave apply_spin(const SpinorWave& state) {
  const auto ng = static_cast<Eigen::Index>(state.orbital_size());
  const Eigen::Matrix2cd s = spin_matrix(state.spin_axis);
  Eigen::VectorXcd c(state.coefficients.size());
  c.head(ng) = s(0, 0) * state.coefficients.head(ng) + s(0, 1) * state.coefficients.tail(ng);
  c.tail(ng) = s(1, 0) * state.coefficients.head(ng) + s(1, 1) * state.coefficients.tail(ng);
  return with_coefficients(state, state.kpoint, std::move(c));
}

SpinorWave apply_momentum(const SpinorWave& state, const TriclinicLattice& lattice, int j, double hbar) {
  if (j < 0 || j > 2) throw Error(ErrorKind::OutOfRange, "momentum component must be 0, 1 or 2");
  const std::size_t ng = state.orbital_size();
  Eigen::VectorXcd c = state.coefficients;
  for (std::size_t i = 0; i < ng; ++i) {
    const GIndex& g = (*state.gvectors)[i];
    const double p = hbar * lattice.cartesian_k(state.kpoint + Vec3(g[0], g[1], g[2]))[j];
    c[Eigen::Index(i)] *= p;
    c[Eigen::Index(ng + i)] *= p;
  }
  return with_coefficients(state, state.kpoint, std::move(c));
}

double spin_expectation(const SpinorWave& state) {
  const SpinorWave s = apply_spin(state);
  return state.coefficients.dot(s.coefficients).real() / state.coefficients.squaredNorm();
}

double state_distance(const SpinorWave& a, const SpinorWave& b) {
  if (a.gvectors != b.gvectors || (a.kpoint - b.kpoint).cwiseAbs().maxCoeff() > 1e-14 ||
      a.coefficients.size() != b.coefficients.size()) {
    return std::numeric_limits<double>::infinity();
  }
  return (a.coefficients - b.coefficients).norm();
}

double eigen_residual(const Eigen::MatrixXcd& h, const SpinorWave& state, double energy) {
  if (h.cols() != state.coefficients.size()) throw Error(ErrorKind::BasisMismatch, "state does not fit matrix");
  return (h * state.coefficients - energy * state.coefficients).norm();
}

SpinorWave random_spinor(const PlaneWaveBasis& basis, std::uint64_t seed, const Vec3& spin_axis) {
  if (!basis.gvectors || !basis.gvectors->negation_closed()) {
    throw Error(ErrorKind::BasisMismatch, "random states need a G-set closed under negation");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd c(static_cast<Eigen::Index>(2 * basis.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    c[i] = Complex(re, im);
  }
  c.normalize();
  return SpinorWave{basis.kpoint, basis.gvectors, std::move(c), spin_axis};
}

double SymmetryReport::max_residual() const {
  double m = 0.0;
  for (const auto& [name, value] : residuals) m = std::max(m, value);
  return m;
}

std::string SymmetryReport::worst() const {
  std::string name;
  double m = -1.0;
  for (const auto& [key, value] : residuals) {
    if (value > m) {
      m = value;
      name = key;
    }
  }
  return name;
}

SymmetryReport verify_identities(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, std::uint64_t seed,
                                 const IdentityOptions& options) {
  SymmetryReport report;
  report.seed = seed;
  report.basis_size = basis.size();
  report.state_count = options.state_count;
  report.kpoint = basis.kpoint;
  report.spin_axis = options.spin_axis;
  auto& r = report.residuals;
  for (const char* name : {"bloch_residual", "iti_residual", "kt_commutation_residual", "k2_residual", "i2_residual",
                           "ks_anticomm_residual", "kp_anticomm_residual", "ip_anticomm_residual",
                           "c_composition_residual", "norm_residual_translation", "norm_residual_inversion",
                           "norm_residual_time_reversal", "norm_residual_conjugation"}) {
    r[name] = 0.0;
  }

  const auto& K = options.time_reversal;

  std::vector<std::uint64_t> seeds(options.state_count);
  {
    std::mt19937_64 master(seed);
    for (auto& s : seeds) s = master();
  }

  std::vector<std::map<std::string, double>> partial(options.state_count);
  parallel_for(options.state_count, [&](std::size_t idx) {
    auto& t = partial[idx];
    const SpinorWave psi = random_spinor(basis, seeds[idx], options.spin_axis);
    const SpinorWave kpsi = K(psi);
    const SpinorWave ipsi = apply_inversion(psi);
    const SpinorWave cpsi = apply_conjugation(psi);

    for (const GIndex& n : options.translations) {
      const SpinorWave tpsi = apply_translation(psi, n);
      const Vec3 nv(n[0], n[1], n[2]);
      const Complex bloch = std::polar(1.0, -kTwoPi * psi.kpoint.dot(nv));
      bump(t, "bloch_residual", (tpsi.coefficients - bloch * psi.coefficients).norm());
      bump(t, "iti_residual", state_distance(apply_inversion(tpsi), apply_translation(ipsi, -n)));
      bump(t, "kt_commutation_residual", state_distance(K(tpsi), apply_translation(kpsi, n)));
      bump(t, "norm_residual_translation", std::abs(tpsi.norm() - 1.0));
    }
    bump(t, "k2_residual", anti_distance(K(kpsi), psi));
    bump(t, "i2_residual", state_distance(apply_inversion(ipsi), psi));

    bump(t, "ks_anticomm_residual", anti_distance(K(apply_spin(psi)), apply_spin(kpsi)));

    for (int j = 0; j < 3; ++j) {
      const SpinorWave pj = apply_momentum(psi, lattice, j);
      const double pnorm = std::max(pj.norm(), 1e-300);
      bump(t, "kp_anticomm_residual", anti_distance(K(pj), apply_momentum(kpsi, lattice, j)) / pnorm);
      bump(t, "ip_anticomm_residual", anti_distance(apply_inversion(pj), apply_momentum(ipsi, lattice, j)) / pnorm);
    }
    bump(t, "c_composition_residual", state_distance(cpsi, apply_inversion(apply_time_reversal(psi))));
    bump(t, "norm_residual_inversion", std::abs(ipsi.norm() - 1.0));
    bump(t, "norm_residual_time_reversal", std::abs(kpsi.norm() - 1.0));
    bump(t, "norm_residual_conjugation", std::abs(cpsi.norm() - 1.0));
  });
  for (const auto& t : partial) {
    for (const auto& [name, value] : t) bump(r, name, value);
  }
  return report;
}

}  // namespace blochdegen
