// Acceptance suite: prints one PASS/FAIL line per criterion with the
// measured value, its pinned limit and the runtime, and exits nonzero if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "blochdegen/config.hpp"
#include "blochdegen/errors.hpp"
#include "blochdegen/oracle.hpp"
#include "blochdegen/perturbation.hpp"
#include "blochdegen/scenarios.hpp"
#include "blochdegen/spectrum.hpp"
#include "blochdegen/symmetry_ops.hpp"
#include "oracles.hpp"

using namespace blochdegen;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = BLOCHDEGEN_CONFIGS;

/// Aggregated outcome of one criterion.
struct Outcome {
  std::vector<Check> checks;
  std::string note;  ///< extra detail printed after the worst check

  void add(const std::string& name, double value, double limit, bool at_least = false) {
    checks.push_back(Check{name, value, limit, at_least});
  }
  void add_all(const ScenarioResult& r, const std::function<bool(const std::string&)>& keep) {
    for (const Check& c : r.checks) {
      if (keep(c.name)) checks.push_back(c);
    }
  }
  bool passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
  }
  /// The check closest to (or furthest past) its limit.
  const Check* worst() const {
    const Check* w = nullptr;
    double worst_margin = -std::numeric_limits<double>::infinity();
    for (const Check& c : checks) {
      double margin;
      if (c.at_least) {
        margin = c.value > 0.0 ? c.limit / c.value : std::numeric_limits<double>::infinity();
      } else if (c.limit > 0.0) {
        margin = c.value / c.limit;
      } else {
        margin = c.value > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      }
      if (!std::isfinite(c.value)) margin = std::numeric_limits<double>::infinity();
      if (margin > worst_margin) worst_margin = margin, w = &c;
    }
    return w;
  }
};

struct Criterion {
  int number;
  std::string title;
  double budget_s;  ///< ≤ 0 means no runtime limit
  std::function<Outcome()> body;
};

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

RunConfig load(const std::string& name) { return load_config(kConfigs + "/" + name); }

// Maps residuals gathered by the criteria that produce split cases.
Outcome g_maps;

Outcome operator_identities() {
  const RunConfig cfg = load("default.json");
  const TriclinicLattice lattice(cfg.lattice[0], cfg.lattice[1], cfg.lattice[2]);
  const auto basis = build_basis(lattice, cfg.kpoint, cfg.gmax);
  IdentityOptions opt;
  opt.state_count = 50;
  opt.spin_axis = cfg.spin_axis;
  const SymmetryReport r = verify_identities(lattice, basis, cfg.seed, opt);
  Outcome o;
  for (const auto& [name, value] : r.residuals) o.add(name, value, 1e-12);
  o.add("state_shortfall", r.state_count >= 50 ? 0.0 : double(50 - r.state_count), 0.0);
  o.note = std::to_string(r.state_count) + " states, " + std::to_string(basis.size()) + " G-vectors";
  return o;
}

Outcome transformation_laws() {
  RunConfig cfg = load("default.json");
  cfg.verify.eigenstates = 10;
  cfg.tolerances.transform = 1e-10;
  const ScenarioResult r = run_verify(cfg);
  Outcome o;
  o.add_all(r, [](const std::string& n) { return starts_with(n, "laws."); });
  o.note = std::to_string(o.checks.size()) + " law checks over 3 regimes, 10 eigenstates each";
  return o;
}

Outcome degeneracy_ladder() {
  RunConfig cfg = load("default.json");
  cfg.degeneracy.so_scale = 1e4;
  cfg.tolerances.deg = 1e-9;
  cfg.tolerances.kramers = 1e-10;
  const ScenarioResult r = run_degeneracy(cfg);
  Outcome o;
  o.add_all(r, [](const std::string& n) { return !starts_with(n, "maps."); });
  g_maps.add_all(r, [](const std::string& n) { return starts_with(n, "maps."); });
  return o;
}

Outcome null_result() {
  const RunConfig cfg = load("default.json");
  const TriclinicLattice lattice(cfg.lattice[0], cfg.lattice[1], cfg.lattice[2]);
  PhysicalConstants pc;
  pc.so_scale = 1e4;
  const auto basis = build_basis(lattice, cfg.kpoint, cfg.gmax);
  const std::vector<double> lambdas{0.01, 0.02, 0.04, 0.08};
  double worst_ratio = 0.0, min_exponent = std::numeric_limits<double>::infinity();
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::string tag = "seed" + std::to_string(seed);
    const auto v0 = random_fourier_potential(lattice, 100 + seed, Parity::Even, 6, 0.2, 0.7);
    const auto phi = random_fourier_potential(lattice, 200 + seed, Parity::Odd, 6, 0.02, 0.7);
    try {
      const Quartet q = build_quartet(lattice, basis, v0, cfg.band, cfg.spin_axis, pc);
      PerturbationTerms t;
      t.v0 = &v0;
      t.phi = &phi;
      t.u1 = t.u2 = t.phi_orbital = true;
      const SecularMatrix full = secular_elements(lattice, q, t, pc);
      const double ratio = std::max({std::abs(full.d1), std::abs(full.d2), std::abs(full.beta)}) /
                           std::max({std::abs(full.a2), std::abs(full.c2), 1e-8});
      worst_ratio = std::max(worst_ratio, ratio);
      o.add(tag + ".null_ratio", ratio, 1e-10);
      for (const auto& [name, value] : subspace_maps(full)) g_maps.add("null_result." + tag + "." + name, value, 1e-10);

      std::vector<double> residuals;
      for (double lambda : lambdas) {
        t.delta_scale = lambda;
        const PerturbationOutcome fo = first_order(secular_elements(lattice, q, t, pc));
        ModelTerms mt;
        mt.v0 = &v0;
        mt.phi = &phi;
        mt.so_v0 = mt.so_phi = true;
        mt.delta_scale = lambda;
        const Eigen::VectorXd ek = eigenvalues(assemble(lattice, basis, mt, pc, true).matrix);
        const Eigen::VectorXd emk = eigenvalues(assemble(lattice, basis.negated_k(), mt, pc, true).matrix);
        Eigen::VectorXd merged(ek.size() + emk.size());
        merged << ek, emk;
        const ExactSplitting ex = exact_splitting(merged, q.energy, std::max(50.0 * fo.splitting, 1e-4));
        residuals.push_back(std::abs(ex.splitting - fo.splitting));
      }
      const PowerLawFit fit = fit_power_law(lambdas, residuals);
      min_exponent = std::min(min_exponent, fit.exponent);
      o.add(tag + ".fitted_exponent", fit.exponent, 1.9, true);
    } catch (const Error& e) {
      o.add(tag + ".error", std::numeric_limits<double>::infinity(), 0.0);
      std::fprintf(stderr, "criterion 4: %s failed: %s\n", tag.c_str(), e.what());
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "20 seeds, max null ratio %.2e, min fitted exponent %.3f", worst_ratio, min_exponent);
  o.note = buf;
  return o;
}

Outcome external_channel() {
  Outcome o;
  // β′ against real-space quadrature of ⟨k|V′|−k⟩ over the supercell.
  const RunConfig cfg = load("external_pinacoidal.json");
  const RunModel m = make_model(cfg);
  const ExternalSpec& spec = *cfg.external;
  const auto basis = build_basis(m.lattice, cfg.kpoint, cfg.external_run.gmax);
  const ExternalPotential ext = build_external(m.lattice, spec, cfg.external_run.gmax, cfg.kpoint);
  const Quartet q = build_quartet(m.lattice, basis, m.v0, cfg.band, cfg.spin_axis, m.constants);
  PerturbationTerms t;
  t.external = &ext;
  const SecularMatrix sm = secular_elements(m.lattice, q, t, m.constants);
  auto up = [](const SpinorWave& s) {
    oracle::PlaneWaveFunction f;
    f.k = s.kpoint;
    f.g = s.gvectors->gvectors();
    for (std::size_t i = 0; i < f.g.size(); ++i) f.c.push_back(s.coefficients[Eigen::Index(i)]);
    return f;
  };
  const int cells = spec.supercell[0];
  const double lambda = spec.strength;
  auto saw = [&](const Vec3& x) {
    const double s = x[0] / double(cells);
    return lambda * (s - std::floor(s) - 0.5);
  };
  const auto& extent = basis.gvectors->extent();
  const std::array<oracle::Axis, 3> axes{oracle::gauss_axis(4 * cells, double(cells)),
                                         oracle::uniform_axis(2 * extent[1] + 3, 1.0),
                                         oracle::uniform_axis(2 * extent[2] + 3, 1.0)};
  const Complex want = oracle::box_matrix_element(up(q.states[0]), up(q.states[2]), saw, axes);
  o.add("beta_prime_quadrature_relative", std::abs(sm.beta_prime - want) / std::abs(want), 1e-10);

  const ScenarioResult pin = run_external(cfg);
  o.add_all(pin, [](const std::string& n) { return !starts_with(n, "maps."); });
  g_maps.add_all(pin, [](const std::string& n) { return starts_with(n, "maps."); });
  const ScenarioResult scan = run_oracle(cfg);
  o.add_all(scan, [](const std::string&) { return true; });

  const ScenarioResult ped = run_external(load("external_pedial.json"));
  for (const Check& c : ped.checks) {
    (starts_with(c.name, "maps.") ? g_maps : o).add("pedial." + c.name, c.value, c.limit, c.at_least);
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "|beta'| %.4e, pinacoidal diff %.2e, pedial diff %.2e, exponent %.3f",
                std::abs(sm.beta_prime), pin.results.value("relative_difference", -1.0),
                ped.results.value("relative_difference", -1.0), scan.results["fit"].value("exponent", -1.0));
  o.note = buf;
  return o;
}

Outcome subspace_maps_gathered() {
  Outcome o = g_maps;
  o.note = std::to_string(o.checks.size()) + " map residuals from criteria 3-5";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  struct Run {
    std::string command, config;
  };
  const std::vector<Run> suite{{"verify", "default.json"},         {"bands", "default.json"},
                               {"degeneracy", "default.json"},     {"perturb", "default.json"},
                               {"external", "external_pinacoidal.json"}, {"oracle", "external_pinacoidal.json"},
                               {"external", "external_pedial.json"}};
  const fs::path root = fs::temp_directory_path() / "blochdegen_acceptance";
  fs::remove_all(root);
  Outcome o;
  std::size_t files = 0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const std::string tag = suite[i].command + "_" + std::to_string(i);
    std::vector<fs::path> dirs;
    for (const char* pass : {"a", "b"}) {
      const fs::path out = root / pass / tag;
      const std::string cmd = std::string("\"") + BLOCHDEGEN_CLI + "\" " + suite[i].command + " --config \"" +
                              kConfigs + "/" + suite[i].config + "\" --out \"" + out.string() + "\" > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      o.add(tag + "." + pass + ".exit_status", double(status), 0.0);
      dirs.push_back(out);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const fs::path other = dirs[1] / entry.path().filename();
      const bool same = fs::exists(other) && slurp(entry.path()) == slurp(other);
      o.add(tag + "." + entry.path().filename().string() + ".differs", same ? 0.0 : 1.0, 0.0);
      ++files;
    }
  }
  o.note = std::to_string(files) + " output files compared byte for byte";
  return o;
}

std::string format_check(const Check& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s = %.3e (limit %s %.1e)", c.name.c_str(), c.value, c.at_least ? ">=" : "<=",
                c.limit);
  return buf;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "operator identity suite", 5.0, operator_identities},
      {2, "transformation laws", 30.0, transformation_laws},
      {3, "degeneracy ladder", 120.0, degeneracy_ladder},
      {4, "null result", 180.0, null_result},
      {5, "external-field channel", 600.0, external_channel},
      {6, "subspace maps", 0.0, subspace_maps_gathered},
      {7, "determinism", 0.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    std::string error;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s <= 0.0 || seconds < c.budget_s;
    const bool pass = error.empty() && o.passed() && in_time;
    failures += pass ? 0 : 1;

    std::string detail;
    if (!error.empty()) {
      detail = "error: " + error;
    } else if (const Check* w = o.worst()) {
      const std::size_t ok = std::size_t(std::count_if(o.checks.begin(), o.checks.end(), [](const Check& k) { return k.pass(); }));
      detail = std::to_string(ok) + "/" + std::to_string(o.checks.size()) + " checks, worst " + format_check(*w);
    } else {
      detail = "no checks";
    }
    if (!o.note.empty()) detail += "; " + o.note;
    char timing[96];
    if (c.budget_s > 0.0) {
      std::snprintf(timing, sizeof timing, "runtime %.1f s (limit < %.0f s)", seconds, c.budget_s);
    } else {
      std::snprintf(timing, sizeof timing, "runtime %.1f s", seconds);
    }
    std::printf("criterion %d [%s] %s: %s; %s\n", c.number, pass ? "PASS" : "FAIL", c.title.c_str(), detail.c_str(),
                timing);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
