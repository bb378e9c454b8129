#include "blochdegen/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "blochdegen/errors.hpp"
#include "blochdegen/spectrum.hpp"

namespace blochdegen {

namespace {

double max_abs(const Eigen::Matrix4cd& m) { return m.cwiseAbs().maxCoeff(); }

bool same_k(const Vec3& a, const Vec3& b) { return (a - b).cwiseAbs().maxCoeff() <= 1e-14; }

// Projects one perturbation term onto four states. Sector blocks are built
// once per distinct (k_bra, k_ket) pair.
Eigen::Matrix4cd project(const TriclinicLattice& lattice, const std::array<SpinorWave, 4>& states,
                         const FourierPotential& v, bool spin_orbit, const PhysicalConstants& constants) {
  std::array<int, 4> sector{};
  std::vector<Vec3> sector_k;
  for (std::size_t i = 0; i < 4; ++i) {
    auto it = std::find_if(sector_k.begin(), sector_k.end(), [&](const Vec3& k) { return same_k(k, states[i].kpoint); });
    if (it == sector_k.end()) {
      sector_k.push_back(states[i].kpoint);
      sector[i] = int(sector_k.size()) - 1;
    } else {
      sector[i] = int(it - sector_k.begin());
    }
    if (states[i].gvectors != states[0].gvectors) throw Error(ErrorKind::BasisMismatch, "quartet states differ in G-set");
  }
  const GVectorSet& g = *states[0].gvectors;
  const auto n = static_cast<Eigen::Index>(g.size());
  std::map<std::pair<int, int>, Eigen::MatrixXcd> blocks;
  Eigen::Matrix4cd out;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const auto key = std::make_pair(sector[i], sector[j]);
      auto it = blocks.find(key);
      if (it == blocks.end()) {
        const Vec3& kb = sector_k[std::size_t(key.first)];
        const Vec3& kk = sector_k[std::size_t(key.second)];
        Eigen::MatrixXcd b = spin_orbit ? spin_orbit_block(lattice, kb, g, kk, g, v, constants)
                                        : potential_block(lattice, kb, g, kk, g, v);
        it = blocks.emplace(key, std::move(b)).first;
      }
      const Eigen::VectorXcd& bra = states[i].coefficients;
      const Eigen::VectorXcd& ket = states[j].coefficients;
      if (spin_orbit) {
        out(Eigen::Index(i), Eigen::Index(j)) = bra.dot(it->second * ket);
      } else {
        out(Eigen::Index(i), Eigen::Index(j)) =
            bra.head(n).dot(it->second * ket.head(n)) + bra.tail(n).dot(it->second * ket.tail(n));
      }
    }
  }
  return out;
}

void require_commensurate(const Quartet& q, const ExternalPotential& ext) {
  const GIndex& s = ext.amplitudes.grid_scale();
  if (!nearest_integer(Vec3(q.kpoint[0] * s[0], q.kpoint[1] * s[1], q.kpoint[2] * s[2]))) {
    throw Error(ErrorKind::IncommensurateK, "k is not a multiple of 1/N for the external supercell");
  }
}

}  // namespace

double Quartet::gram_residual() const {
  double r = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const bool compatible = same_k(states[i].kpoint, states[j].kpoint);
      const Complex overlap = compatible ? states[i].coefficients.dot(states[j].coefficients) : Complex{};
      r = std::max(r, std::abs(overlap - (i == j ? 1.0 : 0.0)));
    }
  }
  return r;
}

double Quartet::spin_residual() const {
  static constexpr std::array<double, 4> expected{0.5, -0.5, 0.5, -0.5};
  double r = 0.0;
  for (std::size_t i = 0; i < 4; ++i) r = std::max(r, std::abs(spin_expectation(states[i]) - expected[i]));
  return r;
}

Quartet build_quartet(const TriclinicLattice& lattice, const PlaneWaveBasis& basis, const FourierPotential& v0,
                      std::size_t band, const Vec3& spin_axis, const PhysicalConstants& constants, double tol_deg) {
  if (!basis.gvectors->negation_closed()) throw Error(ErrorKind::BasisMismatch, "quartet basis must be negation-closed");
  if (nearest_integer(2.0 * basis.kpoint)) {
    throw Error(ErrorKind::AccidentalDegeneracy, "k and -k coincide modulo a reciprocal lattice vector");
  }
  const EigenSolution sol = eigensolve(assemble_h0(lattice, basis, v0, constants));
  const auto n = static_cast<std::size_t>(sol.energies.size());
  if (band >= n) throw Error(ErrorKind::OutOfRange, "band index exceeds basis size");

  Quartet q;
  q.band = band;
  q.energy = sol.energies[Eigen::Index(band)];
  q.gap = std::numeric_limits<double>::infinity();
  if (band > 0) q.gap = std::min(q.gap, q.energy - sol.energies[Eigen::Index(band - 1)]);
  if (band + 1 < n) q.gap = std::min(q.gap, sol.energies[Eigen::Index(band + 1)] - q.energy);
  if (q.gap <= 10.0 * tol_deg) {
    throw Error(ErrorKind::AccidentalDegeneracy,
                "band " + std::to_string(band) + " is degenerate at k (gap " + std::to_string(q.gap) + ")");
  }
  q.kpoint = basis.kpoint;
  q.spin_axis = spin_axis;
  q.basis = basis;
  q.orbital = sol.states.col(Eigen::Index(band));

  Eigen::VectorXcd inverted(q.orbital.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    inverted[Eigen::Index(i)] = q.orbital[Eigen::Index(basis.gvectors->negated(i))];
  }
  const PlaneWaveBasis minus = basis.negated_k();
  const Eigen::Vector2cd up = spinor_up(spin_axis);
  const Eigen::Vector2cd down = spinor_down(spin_axis);
  q.states = {spinor_product(basis, q.orbital, up, spin_axis), spinor_product(basis, q.orbital, down, spin_axis),
              spinor_product(minus, inverted, up, spin_axis), spinor_product(minus, inverted, down, spin_axis)};
  return q;
}

Quartet rephased(const Quartet& q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  Quartet out = q;
  for (auto& s : out.states) s.coefficients *= std::polar(1.0, angle(rng));
  return out;
}

double SecularMatrix::hermiticity_residual() const { return max_abs(matrix - matrix.adjoint()); }

double SecularMatrix::layout_residual() const { return max_abs(projected - matrix); }

double SecularMatrix::so_scale(double floor) const { return std::max({std::abs(a2), std::abs(c2), floor}); }

Eigen::Matrix4cd assemble_secular(const SecularMatrix& sm) {
  const Complex a = sm.a1 + sm.a2 + sm.alpha;
  const Complex b = sm.b1 + sm.b2 + sm.alpha;
  const Complex c = sm.c1 + sm.c2;
  const Complex d = sm.d1 + sm.d2 + sm.beta + sm.beta_prime;
  const Complex z{};
  Eigen::Matrix4cd m;
  m << a, c, d, z,
       std::conj(c), b, z, d,
       std::conj(d), z, b, -c,
       z, std::conj(d), -std::conj(c), a;
  return m;
}

Eigen::Matrix4cd projected_matrix(const TriclinicLattice& lattice, const std::array<SpinorWave, 4>& states,
                                  const PerturbationTerms& terms, const PhysicalConstants& constants) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  std::optional<FourierPotential> phi_energy;
  if (terms.phi) phi_energy = electrostatic_energy(*terms.phi, constants).scaled(terms.delta_scale);
  if (terms.u1 && terms.v0) m += terms.delta_scale * project(lattice, states, *terms.v0, true, constants);
  if (terms.u2 && phi_energy) m += project(lattice, states, *phi_energy, true, constants);
  if (terms.phi_orbital && phi_energy) m += project(lattice, states, *phi_energy, false, constants);
  if (terms.external) m += project(lattice, states, terms.external->amplitudes, false, constants);
  return m;
}

SecularMatrix secular_elements(const TriclinicLattice& lattice, const Quartet& quartet, const PerturbationTerms& terms,
                               const PhysicalConstants& constants) {
  SecularMatrix sm;
  const auto& st = quartet.states;
  std::optional<FourierPotential> phi_energy;
  if (terms.phi) phi_energy = electrostatic_energy(*terms.phi, constants).scaled(terms.delta_scale);

  if (terms.u1 && terms.v0) {
    const Eigen::Matrix4cd m = terms.delta_scale * project(lattice, st, *terms.v0, true, constants);
    sm.a1 = m(0, 0), sm.b1 = m(1, 1), sm.c1 = m(0, 1), sm.d1 = m(0, 2);
    sm.projected += m;
  }
  if (terms.u2 && phi_energy) {
    const Eigen::Matrix4cd m = project(lattice, st, *phi_energy, true, constants);
    sm.a2 = m(0, 0), sm.b2 = m(1, 1), sm.c2 = m(0, 1), sm.d2 = m(0, 2);
    sm.projected += m;
  }
  if (terms.phi_orbital && phi_energy) {
    const Eigen::Matrix4cd m = project(lattice, st, *phi_energy, false, constants);
    sm.alpha = m(0, 0), sm.beta = m(0, 2);
    sm.projected += m;
  }
  if (terms.external) {
    require_commensurate(quartet, *terms.external);
    const Eigen::Matrix4cd m = project(lattice, st, terms.external->amplitudes, false, constants);
    sm.beta_prime = m(0, 2);
    sm.has_external = true;
    sm.projected += m;
    if (terms.external_so) {
      const Eigen::Matrix4cd s = project(lattice, st, terms.external->amplitudes, true, constants);
      sm.a_ext = s(0, 0), sm.b_ext = s(1, 1), sm.c_ext = s(0, 1), sm.d_ext = s(0, 2);
      sm.has_external_so = true;
    }
  }
  sm.matrix = assemble_secular(sm);
  return sm;
}

std::map<std::string, double> selection_residuals(const SecularMatrix& sm, bool translation_invariant) {
  std::map<std::string, double> r{
      {"a1_minus_b1", std::abs(sm.a1 - sm.b1)}, {"c1_abs", std::abs(sm.c1)},
      {"d1_imag", std::abs(sm.d1.imag())},      {"a2_plus_b2", std::abs(sm.a2 + sm.b2)},
      {"d2_real", std::abs(sm.d2.real())},      {"alpha_abs", std::abs(sm.alpha)},
      {"beta_real", std::abs(sm.beta.real())},
  };
  if (translation_invariant) {
    r["d1_abs"] = std::abs(sm.d1);
    r["d2_abs"] = std::abs(sm.d2);
    r["beta_abs"] = std::abs(sm.beta);
  }
  return r;
}

PerturbationOutcome first_order(const SecularMatrix& sm, double tol, double tol_deg) {
  const double scale = std::max(1.0, max_abs(sm.matrix));
  for (const auto& [name, value] : std::map<std::string, double>{
           {"a1_minus_b1", std::abs(sm.a1 - sm.b1)}, {"c1_abs", std::abs(sm.c1)}, {"alpha_abs", std::abs(sm.alpha)}}) {
    if (value > tol * scale) {
      throw Error(ErrorKind::SelectionRuleViolation, name + " = " + std::to_string(value));
    }
  }
  PerturbationOutcome out;
  out.selection = selection_residuals(sm, false);
  const Complex d = sm.d1 + sm.d2 + sm.beta + sm.beta_prime;
  const double r = std::sqrt(std::norm(sm.a2.real()) + std::norm(sm.c2) + std::norm(d));
  out.e1_plus = sm.a1.real() + r;
  out.e1_minus = sm.a1.real() - r;
  out.splitting = out.e1_plus - out.e1_minus;

  const Eigen::VectorXd e = eigenvalues(sm.matrix);
  out.eigenvalues = e;
  out.closed_form_residual = std::max({std::abs(e[0] - out.e1_minus), std::abs(e[1] - out.e1_minus),
                                       std::abs(e[2] - out.e1_plus), std::abs(e[3] - out.e1_plus)});
  out.doublet_residual = std::max(e[1] - e[0], e[3] - e[2]);
  out.fourfold = out.splitting <= tol_deg;
  return out;
}

namespace {

void guard_external_so(const SecularMatrix& sm) {
  if (!sm.has_external_so) return;
  const double m = std::max({std::abs(sm.a_ext), std::abs(sm.b_ext), std::abs(sm.c_ext), std::abs(sm.d_ext)});
  if (m > 0.01 * std::abs(sm.beta_prime)) {
    throw Error(ErrorKind::RegimeViolation, "spin-orbit elements of V' reach " + std::to_string(m) +
                                                ", above 1% of |beta'| = " + std::to_string(std::abs(sm.beta_prime)));
  }
}

}  // namespace

double splitting_pedial(const SecularMatrix& sm) {
  guard_external_so(sm);
  return 2.0 * std::sqrt(std::norm(sm.a2.real()) + std::norm(sm.c2) + std::norm(sm.beta_prime));
}

double splitting_pinacoidal(const SecularMatrix& sm, double tol) {
  if (std::abs(sm.a2) > tol || std::abs(sm.c2) > tol) {
    throw Error(ErrorKind::RegimeViolation, "pinacoidal splitting needs a2 = c2 = 0, got |a2| = " +
                                                std::to_string(std::abs(sm.a2)) + ", |c2| = " +
                                                std::to_string(std::abs(sm.c2)));
  }
  guard_external_so(sm);
  return 2.0 * std::abs(sm.beta_prime);
}

Eigen::Matrix4d quartet_time_reversal() {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(3, 0) = 1.0;
  m(2, 1) = -1.0;
  m(1, 2) = 1.0;
  m(0, 3) = -1.0;
  return m;
}

Eigen::Matrix4d quartet_inversion() {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(2, 0) = m(3, 1) = m(0, 2) = m(1, 3) = 1.0;
  return m;
}

std::map<std::string, double> subspace_maps(const SecularMatrix& sm, double tol_deg) {
  const EigenSolution sol = eigensolve(Eigen::MatrixXcd(sm.matrix));
  const double gap = sol.energies[2] - sol.energies[1];
  if (gap <= 10.0 * tol_deg) {
    throw Error(ErrorKind::DegenerateSplit, "doublet gap " + std::to_string(gap) + " does not resolve subspaces");
  }
  const Eigen::Matrix4cd lower = sol.states.leftCols(2) * sol.states.leftCols(2).adjoint();
  const Eigen::Matrix4cd upper = sol.states.rightCols(2) * sol.states.rightCols(2).adjoint();
  const Eigen::Matrix4cd k = quartet_time_reversal().cast<Complex>();
  const Eigen::Matrix4cd inv = quartet_inversion().cast<Complex>();
  const Eigen::Matrix4cd c = k * inv;

  auto anti = [](const Eigen::Matrix4cd& u, const Eigen::Matrix4cd& p) -> Eigen::Matrix4cd {
    return u * p.conjugate() * u.transpose();
  };
  auto unit = [](const Eigen::Matrix4cd& u, const Eigen::Matrix4cd& p) -> Eigen::Matrix4cd {
    return u * p * u.transpose();
  };
  return {
      {"k4_preserves", std::max(max_abs(anti(k, lower) - lower), max_abs(anti(k, upper) - upper))},
      {"i4_exchanges", std::max(max_abs(unit(inv, lower) - upper), max_abs(unit(inv, upper) - lower))},
      {"c4_exchanges", std::max(max_abs(anti(c, lower) - upper), max_abs(anti(c, upper) - lower))},
      {"k4_squared", max_abs(k * k + Eigen::Matrix4cd::Identity())},
  };
}

}  // namespace blochdegen
