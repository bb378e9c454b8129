#include "blochdegen/spectrum.hpp"

#include <lapacke.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "blochdegen/errors.hpp"

namespace blochdegen {

namespace {

void check_hermitian(const Eigen::MatrixXcd& h) {
  if (h.rows() != h.cols()) throw Error(ErrorKind::NonHermitian, "matrix is not square");
  if (h.size() == 0) return;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const double residual = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (residual > 1e-12 * scale) {
    throw Error(ErrorKind::NonHermitian, "max|H - H^dagger| = " + std::to_string(residual));
  }
}

// zheevd on the lower triangle; `a` is overwritten with eigenvectors when vectors = true.
Eigen::VectorXd run_zheevd(Eigen::MatrixXcd& a, bool vectors) {
  const auto n = static_cast<lapack_int>(a.rows());
  Eigen::VectorXd w(a.rows());
  if (n == 0) return w;
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                                         reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info != 0) throw Error(ErrorKind::EigensolverFailure, "zheevd info = " + std::to_string(info));
  return w;
}

}  // namespace

void fix_phase(Eigen::Ref<Eigen::VectorXcd> v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs <= 0.0) return;
  const Complex phase = std::conj(v[best]) / best_abs;
  v *= phase;
  v[best] = Complex(best_abs, 0.0);
}

EigenSolution eigensolve(const Eigen::MatrixXcd& h) {
  check_hermitian(h);
  EigenSolution sol;
  sol.states = h;
  sol.energies = run_zheevd(sol.states, true);
  for (Eigen::Index c = 0; c < sol.states.cols(); ++c) fix_phase(sol.states.col(c));
  return sol;
}

EigenSolution eigensolve(const HamiltonianMatrix& h) {
  EigenSolution sol = eigensolve(h.matrix);
  sol.kpoint = h.kpoint;
  return sol;
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd& h) {
  check_hermitian(h);
  Eigen::MatrixXcd work = h;
  return run_zheevd(work, false);
}

std::vector<DegeneracyCluster> group_degenerate(std::span<const double> energies, double tol_deg) {
  std::vector<DegeneracyCluster> clusters;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (clusters.empty() || energies[i] - energies[i - 1] > tol_deg) clusters.emplace_back();
    clusters.back().members.push_back(i);
  }
  for (auto& c : clusters) {
    double sum = 0.0;
    for (auto m : c.members) sum += energies[m];
    c.mean = sum / static_cast<double>(c.members.size());
    c.spread = energies[c.members.back()] - energies[c.members.front()];
  }
  return clusters;
}

std::vector<std::size_t> cluster_sizes(const std::vector<DegeneracyCluster>& clusters) {
  std::vector<std::size_t> sizes;
  sizes.reserve(clusters.size());
  for (const auto& c : clusters) sizes.push_back(c.members.size());
  return sizes;
}

unsigned worker_count() {
  if (const char* env = std::getenv("BLOCHDEGEN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<BandPathRow> band_path(const TriclinicLattice& lattice, std::span<const Vec3> nodes,
                                   int samples_per_segment, const BandModel& model, std::size_t num_bands) {
  if (nodes.size() < 2) throw Error(ErrorKind::OutOfRange, "band path needs at least two nodes");
  if (samples_per_segment < 1) throw Error(ErrorKind::OutOfRange, "samples_per_segment must be >= 1");

  std::vector<Vec3> kpoints;
  const double s = samples_per_segment;
  for (std::size_t seg = 0; seg + 1 < nodes.size(); ++seg) {
    for (int j = 0; j < samples_per_segment; ++j) {
      kpoints.push_back(((s - j) * nodes[seg] + double(j) * nodes[seg + 1]) / s);
    }
  }
  kpoints.push_back(nodes.back());

  if (model.include_odd && model.phi) require_parity(*model.phi, Parity::Odd, "phi");
  require_parity(model.v0, Parity::Even, "v0");
  const PlaneWaveBasis base = build_basis(lattice, Vec3::Zero(), model.gmax);

  std::vector<BandPathRow> rows(kpoints.size());
  parallel_for(kpoints.size(), [&](std::size_t i) {
    PlaneWaveBasis basis = base;
    basis.kpoint = kpoints[i];
    ModelTerms terms;
    terms.v0 = &model.v0;
    if (model.include_odd && model.phi) terms.phi = &*model.phi;
    terms.so_v0 = model.include_so;
    terms.so_phi = model.include_so;
    const HamiltonianMatrix h = assemble(lattice, basis, terms, model.constants, model.spinful);
    const Eigen::VectorXd e = eigenvalues(h.matrix);
    const auto count = num_bands == 0 ? std::size_t(e.size()) : std::min<std::size_t>(num_bands, e.size());
    rows[i].k_index = i;
    rows[i].k_frac = kpoints[i];
    rows[i].energies.assign(e.data(), e.data() + count);
  });
  return rows;
}

}  // namespace blochdegen
