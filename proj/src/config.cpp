#include "blochdegen/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "blochdegen/errors.hpp"

namespace blochdegen {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ConfigError, where + ": " + what);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(where, "unknown key '" + key + "'");
  }
}

std::string child(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double get_double(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "must be finite");
  return v;
}

double get_positive(const json& j, const std::string& where) {
  const double v = get_double(j, where);
  if (!(v > 0.0)) fail(where, "must be positive");
  return v;
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

std::int64_t get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

std::size_t get_count(const json& j, const std::string& where) {
  const auto v = get_int(j, where);
  if (v < 0) fail(where, "must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    fail(where, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

Vec3 get_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of three numbers");
  return Vec3(get_double(j[0], where), get_double(j[1], where), get_double(j[2], where));
}

GIndex get_gindex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of three integers");
  GIndex g{};
  for (std::size_t i = 0; i < 3; ++i) g[i] = static_cast<int>(get_int(j[i], where));
  return g;
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

Parity parse_parity(const json& j, const std::string& where) {
  const std::string s = get_string(j, where);
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  if (s == "none") return Parity::None;
  fail(where, "parity must be even, odd or none");
}

std::string parity_key(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    case Parity::None: return "none";
  }
  return "none";
}

Regime parse_regime(const json& j, const std::string& where) {
  const std::string s = get_string(j, where);
  if (s == "pinacoidal") return Regime::Pinacoidal;
  if (s == "pedial") return Regime::Pedial;
  fail(where, "regime must be pinacoidal or pedial");
}

PotentialSpec parse_potential(const json& j, const std::string& where) {
  check_keys(j, {"parity", "seed", "shells", "scale", "decay", "amplitudes"}, where);
  PotentialSpec p;
  if (!j.contains("parity")) fail(where, "missing 'parity'");
  p.parity = parse_parity(j["parity"], child(where, "parity"));
  if (j.contains("seed")) p.seed = get_seed(j["seed"], child(where, "seed"));
  if (j.contains("shells")) p.shells = static_cast<int>(get_count(j["shells"], child(where, "shells")));
  if (j.contains("scale")) p.scale = get_double(j["scale"], child(where, "scale"));
  if (j.contains("decay")) p.decay = get_double(j["decay"], child(where, "decay"));
  if (j.contains("amplitudes")) {
    const std::string w = child(where, "amplitudes");
    if (!j["amplitudes"].is_array()) fail(w, "expected an array");
    for (const auto& a : j["amplitudes"]) {
      check_keys(a, {"g", "value"}, w);
      if (!a.contains("g") || !a.contains("value")) fail(w, "each amplitude needs 'g' and 'value'");
      const GIndex g = get_gindex(a["g"], w + ".g");
      if (!a["value"].is_array() || a["value"].size() != 2) fail(w + ".value", "expected [re, im]");
      p.amplitudes.emplace_back(g, Complex(get_double(a["value"][0], w), get_double(a["value"][1], w)));
    }
  }
  return p;
}

ExternalSpec parse_external(const json& j, const std::string& where) {
  check_keys(j, {"kind", "direction", "strength", "supercell", "harmonics", "center", "width", "harmonic_box"}, where);
  ExternalSpec e;
  if (j.contains("kind")) {
    const std::string k = get_string(j["kind"], child(where, "kind"));
    if (k == "sawtooth") e.kind = ExternalKind::Sawtooth;
    else if (k == "gaussian_bump") e.kind = ExternalKind::GaussianBump;
    else fail(child(where, "kind"), "must be sawtooth or gaussian_bump");
  }
  if (j.contains("direction")) e.direction = get_gindex(j["direction"], child(where, "direction"));
  if (j.contains("strength")) e.strength = get_double(j["strength"], child(where, "strength"));
  if (j.contains("supercell")) e.supercell = get_gindex(j["supercell"], child(where, "supercell"));
  if (j.contains("harmonics")) e.harmonics = static_cast<int>(get_count(j["harmonics"], child(where, "harmonics")));
  if (j.contains("center")) e.center = get_vec3(j["center"], child(where, "center"));
  if (j.contains("width")) e.width = get_positive(j["width"], child(where, "width"));
  if (j.contains("harmonic_box")) e.harmonic_box = get_gindex(j["harmonic_box"], child(where, "harmonic_box"));
  if (e.strength < 0.0) fail(child(where, "strength"), "must be non-negative");
  for (int n : e.supercell) {
    if (n < 1) fail(child(where, "supercell"), "repetitions must be positive");
  }
  return e;
}

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }
json g_json(const GIndex& g) { return json::array({g[0], g[1], g[2]}); }

json potential_json(const PotentialSpec& p) {
  json j{{"parity", parity_key(p.parity)}};
  if (p.amplitudes.empty()) {
    j["seed"] = p.seed;
    j["shells"] = p.shells;
    j["scale"] = p.scale;
    j["decay"] = p.decay;
  } else {
    json list = json::array();
    for (const auto& [g, v] : p.amplitudes) list.push_back({{"g", g_json(g)}, {"value", {v.real(), v.imag()}}});
    j["amplitudes"] = list;
  }
  return j;
}

}  // namespace

const char* regime_name(Regime r) noexcept { return r == Regime::Pinacoidal ? "pinacoidal" : "pedial"; }

FourierPotential build_potential(const TriclinicLattice& lattice, const PotentialSpec& spec) {
  FourierPotential v(spec.parity);
  if (spec.amplitudes.empty()) {
    v = random_fourier_potential(lattice, spec.seed, spec.parity, spec.shells, spec.scale, spec.decay);
  } else {
    for (const auto& [g, value] : spec.amplitudes) {
      if (g == GIndex{0, 0, 0}) throw Error(ErrorKind::ConfigError, "potential amplitude at G = 0 is not allowed");
      v.set_pair(g, value);
    }
  }
  v.validate();
  return v;
}

ExternalPotential build_external(const TriclinicLattice& lattice, const ExternalSpec& spec, double gmax,
                                 const Vec3& kpoint) {
  if (spec.kind == ExternalKind::GaussianBump) {
    return gaussian_bump_external(lattice, spec.center, spec.width, spec.strength, spec.supercell, spec.harmonic_box);
  }
  int harmonics = spec.harmonics;
  if (harmonics == 0) {
    const GIndex extent = build_basis(lattice, Vec3::Zero(), gmax).gvectors->extent();
    int reach = 0;
    for (int i = 0; i < 3; ++i) {
      const int m = static_cast<int>(std::lround(std::abs(kpoint[i]) * spec.supercell[i]));
      reach = std::max(reach, 2 * spec.supercell[i] * (extent[i] + 1) + 2 * m);
    }
    harmonics = reach;
  }
  return sawtooth_external(lattice, spec.direction, spec.strength, spec.supercell, harmonics);
}

RunConfig parse_config(const json& j) {
  check_keys(j, {"lattice", "gmax", "constants", "potentials", "external", "kpoint", "band", "spin_axis", "seed",
                 "output", "tolerances", "verify", "bands", "degeneracy", "perturb", "external_run", "oracle"},
             "config");
  RunConfig c;
  if (j.contains("lattice")) {
    const json& l = j["lattice"];
    check_keys(l, {"a1", "a2", "a3"}, "lattice");
    for (int i = 0; i < 3; ++i) {
      const std::string key = "a" + std::to_string(i + 1);
      if (!l.contains(key)) fail("lattice", "missing '" + key + "'");
      c.lattice[std::size_t(i)] = get_vec3(l[key], "lattice." + key);
    }
  }
  if (j.contains("gmax")) c.gmax = get_positive(j["gmax"], "gmax");
  if (j.contains("constants")) {
    check_keys(j["constants"], {"so_scale"}, "constants");
    if (j["constants"].contains("so_scale")) c.so_scale = get_double(j["constants"]["so_scale"], "constants.so_scale");
    if (c.so_scale < 0.0) fail("constants.so_scale", "must be non-negative");
  }
  if (j.contains("potentials")) {
    const json& p = j["potentials"];
    check_keys(p, {"v0", "phi"}, "potentials");
    if (p.contains("v0")) c.v0 = parse_potential(p["v0"], "potentials.v0");
    if (p.contains("phi") && !p["phi"].is_null()) c.phi = parse_potential(p["phi"], "potentials.phi");
  } else {
    c.phi = PotentialSpec{Parity::Odd, 2, 6, 0.02, 0.7, {}};
  }
  if (j.contains("potentials") && !j["potentials"].contains("phi")) c.phi = PotentialSpec{Parity::Odd, 2, 6, 0.02, 0.7, {}};
  if (j.contains("external") && !j["external"].is_null()) c.external = parse_external(j["external"], "external");
  if (j.contains("kpoint")) {
    const json& k = j["kpoint"];
    check_keys(k, {"fractional", "m", "bvk"}, "kpoint");
    if (k.contains("fractional")) {
      if (k.contains("m") || k.contains("bvk")) fail("kpoint", "give either 'fractional' or 'm' with 'bvk'");
      c.kpoint = get_vec3(k["fractional"], "kpoint.fractional");
    } else {
      if (!k.contains("m") || !k.contains("bvk")) fail("kpoint", "'m' and 'bvk' must be given together");
      const GIndex m = get_gindex(k["m"], "kpoint.m");
      const GIndex n = get_gindex(k["bvk"], "kpoint.bvk");
      c.kpoint = commensurate_k(m, n);
      c.kpoint_bvk = std::make_pair(m, n);
    }
  }
  if (j.contains("band")) c.band = get_count(j["band"], "band");
  if (j.contains("spin_axis")) {
    const Vec3 u = get_vec3(j["spin_axis"], "spin_axis");
    if (!(u.norm() > 0.0)) fail("spin_axis", "must be non-zero");
    c.spin_axis = u.normalized();
  }
  if (j.contains("seed")) c.seed = get_seed(j["seed"], "seed");
  if (j.contains("output")) c.output = get_string(j["output"], "output");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    check_keys(t, {"deg", "identity", "transform", "selection", "null_ratio", "closed_form", "kramers", "maps",
                   "oracle_relative", "exponent_min"},
               "tolerances");
    auto set = [&](const char* key, double& field) {
      if (t.contains(key)) field = get_positive(t[key], std::string("tolerances.") + key);
    };
    set("deg", c.tolerances.deg);
    set("identity", c.tolerances.identity);
    set("transform", c.tolerances.transform);
    set("selection", c.tolerances.selection);
    set("null_ratio", c.tolerances.null_ratio);
    set("closed_form", c.tolerances.closed_form);
    set("kramers", c.tolerances.kramers);
    set("maps", c.tolerances.maps);
    set("oracle_relative", c.tolerances.oracle_relative);
    set("exponent_min", c.tolerances.exponent_min);
  }
  if (j.contains("verify")) {
    const json& v = j["verify"];
    check_keys(v, {"states", "eigenstates", "so_scale"}, "verify");
    if (v.contains("states")) c.verify.states = get_count(v["states"], "verify.states");
    if (v.contains("eigenstates")) c.verify.eigenstates = get_count(v["eigenstates"], "verify.eigenstates");
    if (v.contains("so_scale")) c.verify.so_scale = get_positive(v["so_scale"], "verify.so_scale");
  }
  if (j.contains("bands")) {
    const json& b = j["bands"];
    check_keys(b, {"path", "samples", "num_bands", "include_odd", "include_so"}, "bands");
    if (b.contains("path")) {
      if (!b["path"].is_array() || b["path"].size() < 2) fail("bands.path", "needs at least two nodes");
      c.bands.path.clear();
      for (const auto& node : b["path"]) c.bands.path.push_back(get_vec3(node, "bands.path"));
    }
    if (b.contains("samples")) c.bands.samples = static_cast<int>(get_count(b["samples"], "bands.samples"));
    if (c.bands.samples < 1) fail("bands.samples", "must be at least 1");
    if (b.contains("num_bands")) c.bands.num_bands = get_count(b["num_bands"], "bands.num_bands");
    if (b.contains("include_odd")) c.bands.include_odd = get_bool(b["include_odd"], "bands.include_odd");
    if (b.contains("include_so")) c.bands.include_so = get_bool(b["include_so"], "bands.include_so");
  }
  if (j.contains("degeneracy")) {
    const json& d = j["degeneracy"];
    check_keys(d, {"so_scale", "clusters"}, "degeneracy");
    if (d.contains("so_scale")) c.degeneracy.so_scale = get_positive(d["so_scale"], "degeneracy.so_scale");
    if (d.contains("clusters")) c.degeneracy.clusters = get_count(d["clusters"], "degeneracy.clusters");
  }
  if (j.contains("perturb")) {
    const json& p = j["perturb"];
    check_keys(p, {"u1", "u2", "phi_orbital", "delta_scale"}, "perturb");
    if (p.contains("u1")) c.perturb.u1 = get_bool(p["u1"], "perturb.u1");
    if (p.contains("u2")) c.perturb.u2 = get_bool(p["u2"], "perturb.u2");
    if (p.contains("phi_orbital")) c.perturb.phi_orbital = get_bool(p["phi_orbital"], "perturb.phi_orbital");
    if (p.contains("delta_scale")) c.perturb.delta_scale = get_double(p["delta_scale"], "perturb.delta_scale");
  }
  if (j.contains("external_run")) {
    const json& e = j["external_run"];
    check_keys(e, {"regime", "delta_scale", "gmax"}, "external_run");
    if (e.contains("regime")) c.external_run.regime = parse_regime(e["regime"], "external_run.regime");
    if (e.contains("delta_scale")) c.external_run.delta_scale = get_double(e["delta_scale"], "external_run.delta_scale");
    if (e.contains("gmax")) c.external_run.gmax = get_positive(e["gmax"], "external_run.gmax");
  }
  if (j.contains("oracle")) {
    const json& o = j["oracle"];
    check_keys(o, {"regime", "lambdas", "delta_scale", "gmax"}, "oracle");
    if (o.contains("regime")) c.oracle.regime = parse_regime(o["regime"], "oracle.regime");
    if (o.contains("lambdas")) {
      if (!o["lambdas"].is_array()) fail("oracle.lambdas", "expected an array");
      c.oracle.lambdas.clear();
      for (const auto& l : o["lambdas"]) {
        const double v = get_double(l, "oracle.lambdas");
        if (v < 0.0) fail("oracle.lambdas", "strengths must be non-negative");
        c.oracle.lambdas.push_back(v);
      }
    }
    if (o.contains("delta_scale")) c.oracle.delta_scale = get_double(o["delta_scale"], "oracle.delta_scale");
    if (o.contains("gmax")) c.oracle.gmax = get_positive(o["gmax"], "oracle.gmax");
  }

  // Physics validation before any computation.
  const TriclinicLattice lattice(c.lattice[0], c.lattice[1], c.lattice[2]);
  PhysicalConstants constants;
  constants.so_scale = c.so_scale;
  constants.validate();
  if (c.v0.parity != Parity::Even) {
    throw Error(ErrorKind::ParityViolation, "potentials.v0 must be tagged even");
  }
  build_potential(lattice, c.v0);
  if (c.phi) {
    if (c.phi->parity != Parity::Odd) throw Error(ErrorKind::ParityViolation, "potentials.phi must be tagged odd");
    build_potential(lattice, *c.phi);
  }
  if (c.external) {
    const GIndex& n = c.external->supercell;
    if (!nearest_integer(Vec3(c.kpoint[0] * n[0], c.kpoint[1] * n[1], c.kpoint[2] * n[2]))) {
      throw Error(ErrorKind::IncommensurateK, "kpoint is not commensurate with external.supercell");
    }
    if (c.external->kind == ExternalKind::Sawtooth && c.external->direction == GIndex{0, 0, 0}) {
      fail("external.direction", "must be non-zero");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("invalid JSON: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
}

json to_json(const RunConfig& c) {
  json j;
  j["lattice"] = {{"a1", vec_json(c.lattice[0])}, {"a2", vec_json(c.lattice[1])}, {"a3", vec_json(c.lattice[2])}};
  j["gmax"] = c.gmax;
  j["constants"] = {{"so_scale", c.so_scale}};
  j["potentials"] = {{"v0", potential_json(c.v0)}, {"phi", c.phi ? potential_json(*c.phi) : json(nullptr)}};
  if (c.external) {
    const ExternalSpec& e = *c.external;
    j["external"] = {{"kind", e.kind == ExternalKind::Sawtooth ? "sawtooth" : "gaussian_bump"},
                     {"direction", g_json(e.direction)},
                     {"strength", e.strength},
                     {"supercell", g_json(e.supercell)},
                     {"harmonics", e.harmonics},
                     {"center", vec_json(e.center)},
                     {"width", e.width},
                     {"harmonic_box", g_json(e.harmonic_box)}};
  } else {
    j["external"] = nullptr;
  }
  if (c.kpoint_bvk) {
    j["kpoint"] = {{"m", g_json(c.kpoint_bvk->first)}, {"bvk", g_json(c.kpoint_bvk->second)}};
  } else {
    j["kpoint"] = {{"fractional", vec_json(c.kpoint)}};
  }
  j["band"] = c.band;
  j["spin_axis"] = vec_json(c.spin_axis);
  j["seed"] = c.seed;
  j["output"] = c.output;
  const Tolerances& t = c.tolerances;
  j["tolerances"] = {{"deg", t.deg},           {"identity", t.identity},
                     {"transform", t.transform}, {"selection", t.selection},
                     {"null_ratio", t.null_ratio}, {"closed_form", t.closed_form},
                     {"kramers", t.kramers},     {"maps", t.maps},
                     {"oracle_relative", t.oracle_relative}, {"exponent_min", t.exponent_min}};
  j["verify"] = {
      {"states", c.verify.states}, {"eigenstates", c.verify.eigenstates}, {"so_scale", c.verify.so_scale}};
  json path = json::array();
  for (const Vec3& p : c.bands.path) path.push_back(vec_json(p));
  j["bands"] = {{"path", path},
                {"samples", c.bands.samples},
                {"num_bands", c.bands.num_bands},
                {"include_odd", c.bands.include_odd},
                {"include_so", c.bands.include_so}};
  j["degeneracy"] = {{"so_scale", c.degeneracy.so_scale}, {"clusters", c.degeneracy.clusters}};
  j["perturb"] = {{"u1", c.perturb.u1},
                  {"u2", c.perturb.u2},
                  {"phi_orbital", c.perturb.phi_orbital},
                  {"delta_scale", c.perturb.delta_scale}};
  j["external_run"] = {{"regime", regime_name(c.external_run.regime)},
                       {"delta_scale", c.external_run.delta_scale},
                       {"gmax", c.external_run.gmax}};
  j["oracle"] = {{"regime", regime_name(c.oracle.regime)},
                 {"lambdas", c.oracle.lambdas},
                 {"delta_scale", c.oracle.delta_scale},
                 {"gmax", c.oracle.gmax}};
  return j;
}

}  // namespace blochdegen
