#include "blochdegen/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "blochdegen/errors.hpp"
#include "blochdegen/spectrum.hpp"

namespace blochdegen {

namespace {

// Symmetric residues r ∈ (−N/2, N/2].
std::vector<int> residues(int n) {
  std::vector<int> out;
  for (int r = -((n - 1) / 2); r <= n / 2; ++r) out.push_back(r);
  return out;
}

int reduce(int m, int n) {
  int r = ((m % n) + n) % n;
  if (2 * r > n) r -= n;
  return r;
}

}  // namespace

HamiltonianMatrix SupercellModel::hamiltonian() const {
  ModelTerms terms;
  terms.v0 = v0 ? &*v0 : nullptr;
  terms.phi = phi ? &*phi : nullptr;
  terms.external = external ? &*external : nullptr;
  terms.so_v0 = so_v0;
  terms.so_phi = so_phi;
  terms.so_external = so_external;
  terms.delta_scale = delta_scale;
  return assemble(lattice, basis(), terms, constants, spinful);
}

SupercellModel supercell_fold(const TriclinicLattice& unit_lattice, const OracleTerms& terms, const GIndex& repetitions,
                              double gmax, const Vec3& unit_k, const PhysicalConstants& constants) {
  const GIndex& n = repetitions;
  const auto m = nearest_integer(Vec3(unit_k[0] * n[0], unit_k[1] * n[1], unit_k[2] * n[2]));
  if (!m) throw Error(ErrorKind::IncommensurateK, "k is not a multiple of 1/N");
  if (terms.external && terms.external->supercell != repetitions) {
    throw Error(ErrorKind::BasisMismatch, "external field was built for a different supercell");
  }

  SupercellModel model;
  model.repetitions = n;
  model.unit_lattice = unit_lattice;
  model.lattice = unit_lattice.supercell(n);
  model.unit_k = unit_k;
  model.so_v0 = terms.so_v0;
  model.so_phi = terms.so_phi;
  model.so_external = terms.so_external;
  model.spinful = terms.spinful;
  model.delta_scale = terms.delta_scale;
  model.constants = constants;
  const GIndex unit{1, 1, 1};
  if (terms.v0) model.v0 = terms.v0->refined(n).with_grid_scale(unit);
  if (terms.phi) model.phi = terms.phi->refined(n).with_grid_scale(unit);
  if (terms.external) model.external = terms.external->amplitudes.with_grid_scale(unit);

  const PlaneWaveBasis base = build_basis(unit_lattice, Vec3::Zero(), gmax);
  const GIndex target{reduce((*m)[0], n[0]), reduce((*m)[1], n[1]), reduce((*m)[2], n[2])};
  const GIndex target_shift{((*m)[0] - target[0]) / n[0], ((*m)[1] - target[1]) / n[1], ((*m)[2] - target[2]) / n[2]};
  const GIndex mirror{reduce(-(*m)[0], n[0]), reduce(-(*m)[1], n[1]), reduce(-(*m)[2], n[2])};

  std::set<GIndex> all;
  for (int r0 : residues(n[0])) {
    for (int r1 : residues(n[1])) {
      for (int r2 : residues(n[2])) {
        const GIndex r{r0, r1, r2};
        GIndex shift{0, 0, 0};
        if (r == target) shift = target_shift;
        else if (r == mirror) shift = -target_shift;
        std::set<GIndex> list;
        for (const GIndex& g : base.gvectors->gvectors()) list.insert(g + shift);
        // Sectors with a component at N/2 are their own mirror images; close them under negation.
        const GIndex e{2 * r0 == n[0] && n[0] > 1 ? 1 : 0, 2 * r1 == n[1] && n[1] > 1 ? 1 : 0,
                       2 * r2 == n[2] && n[2] > 1 ? 1 : 0};
        if (e != GIndex{0, 0, 0}) {
          std::vector<GIndex> current(list.begin(), list.end());
          for (const GIndex& g : current) list.insert(-e - g);
        }
        SupercellSector sector;
        sector.residue = r;
        sector.unit_k = Vec3(double(r0) / n[0], double(r1) / n[1], double(r2) / n[2]);
        sector.unit_g.assign(list.begin(), list.end());
        for (const GIndex& g : sector.unit_g) all.insert({r0 + n[0] * g[0], r1 + n[1] * g[1], r2 + n[2] * g[2]});
        model.sectors.push_back(std::move(sector));
      }
    }
  }
  std::vector<GIndex> gv(all.begin(), all.end());
  sort_gvectors(model.lattice, gv);
  model.gvectors = std::make_shared<const GVectorSet>(std::move(gv));
  if (!model.gvectors->negation_closed()) {
    throw Error(ErrorKind::BasisMismatch, "folded supercell basis is not closed under negation");
  }
  return model;
}

ExactSplitting exact_splitting(const Eigen::VectorXd& spectrum, double center, double window) {
  if (spectrum.size() < 5) throw Error(ErrorKind::CrowdedWindow, "spectrum has fewer than five levels");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(spectrum.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::partial_sort(order.begin(), order.begin() + 5, order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double da = std::abs(spectrum[a] - center), db = std::abs(spectrum[b] - center);
    return da != db ? da < db : a < b;
  });
  ExactSplitting out;
  std::array<double, 4> lv{};
  for (std::size_t i = 0; i < 4; ++i) {
    lv[i] = spectrum[order[i]];
    if (std::abs(lv[i] - center) > window) {
      throw Error(ErrorKind::CrowdedWindow, "quartet level " + std::to_string(lv[i]) + " lies outside the window");
    }
  }
  out.isolation = std::abs(spectrum[order[4]] - center);
  if (out.isolation <= window) {
    throw Error(ErrorKind::CrowdedWindow, "foreign level at distance " + std::to_string(out.isolation) +
                                              " inside window " + std::to_string(window));
  }
  std::sort(lv.begin(), lv.end());
  out.levels = Eigen::Vector4d(lv[0], lv[1], lv[2], lv[3]);
  out.splitting = 0.5 * (lv[2] + lv[3]) - 0.5 * (lv[0] + lv[1]);
  out.spread_lower = lv[1] - lv[0];
  out.spread_upper = lv[3] - lv[2];
  return out;
}

ExactSplitting exact_splitting(const SupercellModel& model, double center, double window) {
  return exact_splitting(eigenvalues(model.hamiltonian().matrix), center, window);
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++count;
  }
  PowerLawFit fit;
  fit.points = count;
  if (count < 2) return fit;
  const double c = double(count);
  const double denom = c * sxx - sx * sx;
  if (denom == 0.0) return fit;
  fit.exponent = (c * sxy - sx * sy) / denom;
  fit.prefactor = std::exp((sy - fit.exponent * sx) / c);
  return fit;
}

ScanResult linearity_scan(const std::vector<double>& lambdas,
                          const std::function<std::pair<double, double>(double)>& pipeline) {
  if (std::count_if(lambdas.begin(), lambdas.end(), [](double l) { return l > 0.0; }) < 4) {
    throw Error(ErrorKind::OutOfRange, "linearity scan needs at least four positive strengths");
  }
  ScanResult result;
  result.rows.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    const auto [pt, exact] = pipeline(lambdas[i]);
    result.rows[i] = ScanRow{lambdas[i], pt, exact, std::abs(exact - pt)};
  });
  std::vector<double> x, y;
  for (const auto& row : result.rows) {
    x.push_back(row.lambda);
    y.push_back(row.residual);
  }
  result.fit = fit_power_law(x, y);
  return result;
}

}  // namespace blochdegen
