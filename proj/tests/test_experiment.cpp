#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cmcf/barriers.hpp"
#include "cmcf/experiment.hpp"
#include "cmcf/levelset.hpp"
#include "cmcf/snapshot.hpp"

using namespace cmcf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig smoke_config(const std::string& dir) {
  ScenarioConfig cfg;
  cfg.preset = "heisenberg:1";
  cfg.grid_min = Eigen::VectorXd::Constant(1, -1.5);
  cfg.grid_max = Eigen::VectorXd::Constant(1, 1.5);
  cfg.grid_h = Eigen::VectorXd::Constant(1, 0.25);
  cfg.initial_kind = "cylinder";
  cfg.radius = 1.0;
  cfg.cap = 1.0;
  cfg.flow.delta = 1e-6;
  cfg.flow.t_end = 0.05;
  cfg.flow.snapshot_every = 20;
  cfg.output_dir = dir;
  return cfg;
}

}  // namespace

TEST_CASE("snapshot round trip is bit exact") {
  Grid grid = Grid::box((Eigen::VectorXd(2) << -1.0, -2.0).finished(),
                        (Eigen::VectorXd(2) << 1.0, 2.0).finished(),
                        (Eigen::VectorXd(2) << 0.25, 0.5).finished());
  ScalarField f(grid, 0.123456789e-3, 0.7071067811865476);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (std::int64_t i = 0; i < f.values.size(); ++i) f.values[i] = uni(rng);
  const std::string path = "roundtrip.cmcf";
  write_snapshot(path, f);
  ScalarField f2 = read_snapshot(path);
  CHECK(f2.grid.same_layout(f.grid));
  CHECK(f2.far_field == f.far_field);
  CHECK(f2.time == f.time);
  CHECK((f2.values == f.values).all());
  fs::remove(path);
}

TEST_CASE("experiment artifacts are deterministic") {
  ScenarioConfig cfg = smoke_config("out_test_a");
  ExperimentResult r1 = run_experiment(cfg);
  CHECK(r1.passed());
  for (const char* name : {"metrics.csv", "extracts.csv", "manifest.txt"})
    CHECK(fs::exists(fs::path(cfg.output_dir) / name));

  ScenarioConfig cfg2 = smoke_config("out_test_b");
  run_experiment(cfg2);
  CHECK(slurp("out_test_a/manifest.txt") == slurp("out_test_b/manifest.txt"));
  CHECK(verify_manifest("out_test_a").empty());

  // tampering is caught
  {
    std::ofstream patch("out_test_a/metrics.csv", std::ios::app);
    patch << "tamper\n";
  }
  auto bad = verify_manifest("out_test_a");
  REQUIRE(bad.size() == 1);
  CHECK(bad.front().find("metrics.csv") != std::string::npos);

  fs::remove_all("out_test_a");
  fs::remove_all("out_test_b");
}

TEST_CASE("compact data goes extinct inside the cylinder bound") {
  ScenarioConfig cfg = smoke_config("out_test_ext");
  cfg.initial_kind = "blob";
  cfg.blob_center = Eigen::VectorXd::Zero(3);
  cfg.radius = 0.5;
  cfg.cap = 0.6;
  cfg.grid_h = Eigen::VectorXd::Constant(1, 0.125);
  // the blob fits in a cylinder of radius 0.5; t* = R^2/2 = 0.125 for m = 2
  const double t_star = extinction_time(0.5, 2);
  cfg.flow.t_end = 1.1 * t_star + 0.05;
  cfg.flow.snapshot_every = 10;

  CarnotGroup g = make_group(cfg);
  Grid grid = make_grid(cfg, g);
  Trajectory traj = run_flow(g, make_initial(cfg, g, grid), cfg.flow);
  double extinct_at = -1.0;
  for (const auto& snap : traj.snapshots) {
    if (extract_zero_level(snap).empty()) {
      extinct_at = snap.time;
      break;
    }
  }
  REQUIRE(extinct_at >= 0.0);
  CHECK(extinct_at <= 1.1 * t_star);
}

TEST_CASE("separation report: nested cylinders stay nested") {
  ScenarioConfig inner = smoke_config("out_sep_a");
  inner.radius = 0.5;
  inner.flow.t_end = 0.04;
  inner.flow.snapshot_every = 15;
  ScenarioConfig outer = inner;
  outer.radius = 1.0;
  outer.output_dir = "out_sep_b";

  SeparationReport rep = separation_report(inner, outer);
  REQUIRE(!rep.rows.empty());
  CHECK(rep.header.find("approximate") != std::string::npos);
  for (const auto& row : rep.rows) CHECK(row.contained);

  SeparationReport same = separation_report(inner, inner);
  for (const auto& row : same.rows) {
    CHECK(row.contained);
    if (row.separation >= 0.0) CHECK(row.separation == 0.0);
  }
}

TEST_CASE("disjoint blobs keep a nondecreasing separation proxy") {
  ScenarioConfig a = smoke_config("out_blob_a");
  a.initial_kind = "blob";
  a.blob_center = (Eigen::VectorXd(3) << -0.7, 0.0, 0.0).finished();
  a.radius = 0.35;
  a.cap = 0.5;
  a.flow.t_end = 0.03;
  a.flow.snapshot_every = 12;
  ScenarioConfig b = a;
  b.blob_center = (Eigen::VectorXd(3) << 0.7, 0.0, 0.0).finished();
  b.output_dir = "out_blob_b";

  SeparationReport rep = separation_report(a, b);
  REQUIRE(rep.rows.size() >= 2);
  const double h = 0.25;
  double prev = rep.rows.front().separation;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    if (rep.rows[i].separation < 0.0) break;  // one of the sets vanished
    CHECK(rep.rows[i].separation >= prev - 2.0 * h);
    prev = std::max(prev, rep.rows[i].separation);
  }
}

TEST_CASE("vanishing-viscosity experiments write the cauchy report") {
  ScenarioConfig cfg = smoke_config("out_vv");
  cfg.schedule = {{0.5, 0.25}, {0.25, 0.0625}, {0.125, 0.015625}};
  cfg.flow.t_end = 0.03;
  cfg.flow.snapshot_every = 10;
  ExperimentResult res = run_experiment(cfg);
  CHECK(fs::exists("out_vv/cauchy_report.csv"));
  const std::string csv = slurp("out_vv/cauchy_report.csv");
  CHECK(csv.find("d_k") != std::string::npos);
  fs::remove_all("out_vv");
}
