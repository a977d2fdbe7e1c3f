#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cmcf/barriers.hpp"
#include "cmcf/experiment.hpp"

using namespace cmcf;

namespace {

int cmd_run(const std::string& config_path) {
  ParseResult parsed = load_config(config_path);
  if (!parsed.ok()) {
    std::cerr << "config error";
    if (parsed.line > 0) std::cerr << " (line " << parsed.line << ")";
    std::cerr << ": " << parsed.error << "\n";
    return 2;
  }
  ExperimentResult result = run_experiment(*parsed.config);
  std::cout << "artifacts written to " << result.dir << " ("
            << result.files.size() << " files)\n";
  for (const auto& v : result.violations) std::cout << "VIOLATION: " << v << "\n";
  return result.passed() ? 0 : 1;
}

int cmd_check_group(const std::string& preset) {
  CarnotGroup g = CarnotGroup::from_preset(preset);
  StructureReport rep = g.verify_structure();
  std::cout << "structure: " << rep.summary() << "\n";
  std::cout << "empirical quasi-triangle constant: "
            << g.empirical_quasi_triangle_constant(2000, 42) << "\n";
  return rep.passed ? 0 : 1;
}

int cmd_verify_barriers(const std::string& config_path) {
  ParseResult parsed = load_config(config_path);
  if (!parsed.ok()) {
    std::cerr << "config error: " << parsed.error << "\n";
    return 2;
  }
  const ScenarioConfig& cfg = *parsed.config;
  CarnotGroup g = make_group(cfg);
  Grid grid = make_grid(cfg, g);
  const double h = grid.max_spacing();
  const double slack = 5.0 * h * h;
  const double delta = cfg.flow.delta;
  const double eps = cfg.flow.eps;
  bool all_pass = true;

  auto report = [&](const char* name, BarrierKind kind, int k) {
    const double c0 =
        calibrate_barrier_constant(g, kind, k, delta, eps, grid, slack);
    auto rep = barrier_subsolution_residual(g, kind, k, delta, eps, c0, grid,
                                            slack);
    std::cout << name << ": C0 = " << c0 << ", max residual "
              << rep.max_residual << " (slack " << slack << ") -> "
              << (rep.pass ? "pass" : "FAIL") << "\n";
    all_pass = all_pass && rep.pass;
  };

  if (g.horizontal_dim() >= 2) report("cylinder", BarrierKind::Cylinder, -1);
  for (int k = 0; k < g.dim(); ++k)
    if (g.weight(k) == 2) {
      report("plane_squared", BarrierKind::PlaneSquared, k);
      break;
    }
  return all_pass ? 0 : 1;
}

int cmd_compare(const std::string& path_a, const std::string& path_b) {
  ParseResult a = load_config(path_a);
  ParseResult b = load_config(path_b);
  if (!a.ok() || !b.ok()) {
    std::cerr << "config error: " << (a.ok() ? b.error : a.error) << "\n";
    return 2;
  }
  SeparationReport rep = separation_report(*a.config, *b.config);
  std::cout << rep.header << "\n";
  bool contained_all = true;
  for (const auto& row : rep.rows) {
    std::cout << row.t << ',' << (row.contained ? 1 : 0) << ','
              << row.separation << "\n";
    contained_all = contained_all && row.contained;
  }
  return contained_all ? 0 : 1;
}

int cmd_report(const std::string& dir) {
  auto bad = verify_manifest(dir);
  if (!bad.empty()) {
    for (const auto& b : bad) std::cout << "manifest mismatch: " << b << "\n";
    return 1;
  }
  std::cout << "manifest ok\n";
  const auto extracts = std::filesystem::path(dir) / "extracts.csv";
  if (std::filesystem::exists(extracts)) {
    std::ifstream in(extracts.string());
    std::string line, last;
    std::getline(in, line);
    std::cout << line << "\n";
    while (std::getline(in, line))
      if (!line.empty()) last = line;
    std::cout << last << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"level-set horizontal mean curvature flow laboratory"};
  app.require_subcommand(1);

  std::string config_path, preset, dir, path_b;

  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", config_path, "config file")->required();

  auto* check = app.add_subcommand("check-group", "verify a group preset");
  check->add_option("preset", preset, "euclidean:<m>|heisenberg:<nu>|engel")
      ->required();

  auto* barriers =
      app.add_subcommand("verify-barriers", "check the barrier inequalities");
  barriers->add_option("config", config_path, "config file")->required();

  auto* compare = app.add_subcommand("compare", "containment and separation");
  compare->add_option("configA", config_path, "inner set config")->required();
  compare->add_option("configB", path_b, "outer set config")->required();

  auto* report = app.add_subcommand("report", "verify and summarise artifacts");
  report->add_option("dir", dir, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (check->parsed()) return cmd_check_group(preset);
    if (barriers->parsed()) return cmd_verify_barriers(config_path);
    if (compare->parsed()) return cmd_compare(config_path, path_b);
    if (report->parsed()) return cmd_report(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
