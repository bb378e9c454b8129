#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "blochdegen/hamiltonian.hpp"

namespace blochdegen {

/// Full spectrum of a Hermitian matrix. Columns of `states` are orthonormal
/// eigenvectors; each is phase-fixed so that its largest-modulus entry
/// (lowest index on ties) is real and positive.
struct EigenSolution {
  Vec3 kpoint = Vec3::Zero();
  Eigen::VectorXd energies;  ///< ascending, Hartree
  Eigen::MatrixXcd states;
};

EigenSolution eigensolve(const HamiltonianMatrix& h);
EigenSolution eigensolve(const Eigen::MatrixXcd& h);
/// Eigenvalues only (ascending); cheaper for large supercell matrices.
Eigen::VectorXd eigenvalues(const Eigen::MatrixXcd& h);

/// Multiplies `v` by the unit phase that makes its largest-modulus entry real positive.
void fix_phase(Eigen::Ref<Eigen::VectorXcd> v);

struct DegeneracyCluster {
  std::vector<std::size_t> members;
  double mean = 0.0;
  double spread = 0.0;  ///< max - min
};

/// Greedy gap clustering of ascending energies: a new cluster starts where
/// the adjacent gap exceeds tol_deg.
std::vector<DegeneracyCluster> group_degenerate(std::span<const double> energies, double tol_deg);

/// Sizes of the clusters, in order.
std::vector<std::size_t> cluster_sizes(const std::vector<DegeneracyCluster>& clusters);

/// Model used to tabulate bands along a path.
struct BandModel {
  FourierPotential v0{Parity::Even};
  std::optional<FourierPotential> phi;  ///< odd part, used when include_odd
  bool include_odd = false;
  bool include_so = false;
  bool spinful = true;
  double gmax = 10.0;
  PhysicalConstants constants;
};

struct BandPathRow {
  std::size_t k_index = 0;
  Vec3 k_frac = Vec3::Zero();
  std::vector<double> energies;
};

/// k-points ((s-j)·node_a + j·node_b)/s, j = 0..s-1, per segment, plus the
/// final node; rows ordered along the path. `num_bands` = 0 keeps all.
std::vector<BandPathRow> band_path(const TriclinicLattice& lattice, std::span<const Vec3> nodes,
                                   int samples_per_segment, const BandModel& model, std::size_t num_bands = 0);

/// Worker count from BLOCHDEGEN_THREADS, else the hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn);

}  // namespace blochdegen

#include "blochdegen/detail/parallel.hpp"
