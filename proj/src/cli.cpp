#include "blochdegen/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "blochdegen/version.hpp"

namespace blochdegen {

using nlohmann::json;

namespace {

void collect_non_finite(const json& j, const std::string& path, std::vector<std::string>& out) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>())) out.push_back(path);
  } else if (j.is_object()) {
    for (const auto& [key, value] : j.items()) collect_non_finite(value, path.empty() ? key : path + "." + key, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) collect_non_finite(j[i], path + "[" + std::to_string(i) + "]", out);
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
  f << content;
  f.close();
  if (!f) throw Error(ErrorKind::IoFailure, "failed writing '" + path.string() + "'");
}

std::string describe(const Check& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s = %.6e (limit %s %.3e)", c.name.c_str(), c.value, c.at_least ? ">=" : "<=",
                c.limit);
  return buf;
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ConfigError:
    case ErrorKind::ParityViolation:
    case ErrorKind::NonHermitianAmplitudes:
    case ErrorKind::SingularLattice:
    case ErrorKind::OutOfRange:
    case ErrorKind::IncommensurateK:
    case ErrorKind::NonLatticeVector:
    case ErrorKind::BasisMismatch:
    case ErrorKind::IoFailure:
      return 2;
    default:
      return 1;
  }
}

std::vector<std::string> non_finite_paths(const json& j) {
  std::vector<std::string> out;
  collect_non_finite(j, "", out);
  return out;
}

json build_report(const std::string& command, const RunConfig& cfg, const ScenarioResult& result) {
  json checks = json::array();
  for (const Check& c : result.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"limit", c.limit},
                      {"relation", c.at_least ? ">=" : "<="},
                      {"pass", c.pass()}});
  }
  return {{"command", command},       {"version", kVersion},
          {"seed", cfg.seed},         {"config", to_json(cfg)},
          {"results", result.results}, {"checks", checks},
          {"status", result.passed() ? "pass" : "fail"}};
}

void emit_report(const std::string& dir, const json& report,
                 const std::optional<std::pair<std::string, std::string>>& csv) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create output directory '" + dir + "': " + ec.message());
  write_file(std::filesystem::path(dir) / "report.json", report.dump(2) + "\n");
  if (csv) write_file(std::filesystem::path(dir) / csv->first, csv->second);
}

int run_command(int argc, const char* const* argv) {
  CLI::App app{"Symmetry and degenerate perturbation checks for a spinful electron in a triclinic crystal",
               "blochdegen"};
  std::string command, config_path, out_dir;
  std::uint64_t seed = 0;
  app.add_option("command", command, "verify | bands | degeneracy | perturb | external | oracle")
      ->required()
      ->check(CLI::IsMember({"verify", "bands", "degeneracy", "perturb", "external", "oracle"}));
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "output directory (default: the config's 'output')");
  CLI::Option* seed_option = app.add_option("--seed", seed, "overrides the config seed");
  app.set_version_flag("--version", kVersion);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  if (seed_option->count() > 0) cfg.seed = seed;
  if (out_dir.empty()) out_dir = cfg.output;

  try {
    const ScenarioResult result = run_scenario(command, cfg);
    json report = build_report(command, cfg, result);
    const auto bad = non_finite_paths(report);
    if (!bad.empty()) {
      // Keep the file valid JSON and make the failure visible.
      report["status"] = "fail";
      report["non_finite"] = bad;
    }
    std::optional<std::pair<std::string, std::string>> csv;
    if (result.csv_name) csv = std::make_pair(*result.csv_name, result.csv);
    emit_report(out_dir, report, csv);

    std::size_t failed = 0;
    for (const Check& c : result.checks) {
      if (!c.pass()) {
        std::cerr << "check failed: " << describe(c) << "\n";
        ++failed;
      }
    }
    for (const auto& path : bad) std::cerr << "check failed: non-finite value at " << path << "\n";
    std::cout << command << ": " << result.checks.size() - failed << "/" << result.checks.size()
              << " checks passed, report in " << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
    return failed == 0 && bad.empty() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    try {
      json report{{"command", command},
                  {"version", kVersion},
                  {"seed", cfg.seed},
                  {"config", to_json(cfg)},
                  {"error", {{"kind", error_name(e.kind())}, {"message", e.what()}}},
                  {"status", "error"}};
      emit_report(out_dir, report);
    } catch (const Error& io) {
      std::cerr << "error: " << io.what() << "\n";
    }
    return exit_code(e.kind());
  }
}

}  // namespace blochdegen
