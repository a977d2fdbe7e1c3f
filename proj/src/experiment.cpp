#include "cmcf/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmcf/barriers.hpp"
#include "cmcf/levelset.hpp"
#include "cmcf/snapshot.hpp"
#include "cmcf/viscosity.hpp"

namespace fs = std::filesystem;

namespace cmcf {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string metrics_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "step,t,dt,sup,inf,lip_right,mask_fraction\n";
  for (const auto& m : traj.metrics)
    os << m.step << ',' << fmt(m.t) << ',' << fmt(m.dt) << ',' << fmt(m.sup)
       << ',' << fmt(m.inf) << ',' << fmt(m.lip_right) << ','
       << fmt(m.mask_fraction) << '\n';
  return os.str();
}

std::string extracts_csv(const CarnotGroup& g, const Trajectory& traj) {
  std::ostringstream os;
  os << "t,crossings,radius_median,radius_mean\n";
  for (const auto& snap : traj.snapshots) {
    LevelSetExtract ex = extract_zero_level(snap);
    double mean = 0.0;
    auto median = measure_radius(ex, snap.grid, g, &mean);
    os << fmt(snap.time) << ',' << ex.crossings.size() << ',';
    if (median)
      os << fmt(*median) << ',' << fmt(mean);
    else
      os << ',';  // extinct: no radius
    os << '\n';
  }
  return os.str();
}

void check_max_principle(const Trajectory& traj, double max_h,
                         std::vector<std::string>& violations) {
  // The exterior constant is part of the initial data. Scenario generators
  // cap their data, and the crease costs an O(h^2 osc) transient with the
  // central stencils, so the envelope check carries that slack; smooth-data
  // property tests pin the 1e-12 figure.
  const double far = traj.snapshots.front().far_field;
  const double sup0 = std::max(traj.metrics.front().sup, far);
  const double inf0 = std::min(traj.metrics.front().inf, far);
  const double slack =
      std::max(1e-12, 2.0 * max_h * max_h * (sup0 - inf0));
  for (const auto& m : traj.metrics) {
    if (m.sup > sup0 + slack || m.inf < inf0 - slack) {
      std::ostringstream os;
      os << "max principle violated at step " << m.step << ": sup " << m.sup
         << " inf " << m.inf << " vs initial [" << inf0 << ", " << sup0
         << "] + slack " << slack;
      violations.push_back(os.str());
      return;
    }
  }
}

std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snap_%04zu.cmcf", index);
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  return fnv1a64(data.data(), data.size());
}

ExperimentResult run_experiment(const ScenarioConfig& cfg) {
  ExperimentResult result;
  result.dir = cfg.output_dir;
  fs::create_directories(cfg.output_dir);

  const CarnotGroup g = make_group(cfg);
  const Grid grid = make_grid(cfg, g);
  const ScalarField initial = make_initial(cfg, g, grid);

  auto emit = [&](const std::string& name, const std::string& text) {
    write_text((fs::path(cfg.output_dir) / name).string(), text);
    result.files.push_back(name);
  };
  auto emit_snapshot = [&](const std::string& name, const ScalarField& f) {
    write_snapshot((fs::path(cfg.output_dir) / name).string(), f);
    result.files.push_back(name);
  };

  if (!cfg.schedule.empty()) {
    auto [runs, cauchy] = vanishing_viscosity_run(g, initial, cfg.schedule,
                                                  cfg.flow);
    std::ostringstream os;
    os << "k,delta,eps,d_k\n";
    for (std::size_t k = 0; k < cauchy.sup_differences.size(); ++k)
      os << k + 1 << ',' << fmt(cfg.schedule[k].first) << ','
         << fmt(cfg.schedule[k].second) << ','
         << fmt(cauchy.sup_differences[k]) << '\n';
    emit("cauchy_report.csv", os.str());
    for (std::size_t k = 0; k < runs.size(); ++k) {
      std::ostringstream base;
      base << "run" << k << "_";
      emit(base.str() + "metrics.csv", metrics_csv(runs[k]));
      emit_snapshot(base.str() + "final.cmcf", runs[k].snapshots.back());
      check_max_principle(runs[k], grid.max_spacing(), result.violations);
    }
    if (cauchy.sup_differences.size() > 1 && !cauchy.decreasing())
      result.violations.push_back("cauchy differences are not decreasing");
  } else {
    Trajectory traj = run_flow(g, initial, cfg.flow);
    emit("metrics.csv", metrics_csv(traj));
    emit("extracts.csv", extracts_csv(g, traj));
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s)
      emit_snapshot(snapshot_name(s), traj.snapshots[s]);
    check_max_principle(traj, grid.max_spacing(), result.violations);

    if (cfg.viscosity_enabled) {
      const double t_mid = 0.5 * cfg.flow.t_end;
      auto family = make_test_family(g, grid, cfg.viscosity_family, t_mid);
      const double h = grid.max_spacing();
      const double dt = traj.metrics.size() > 1 ? traj.metrics[1].dt : 0.0;
      const double tol =
          cfg.viscosity_tol_c * (h + dt + cfg.flow.delta);
      const double tau = cfg.flow.tau_or_default(grid);
      for (Side side : {Side::Sub, Side::Super}) {
        auto rep = viscosity_residual_check(g, traj, family, tau, side, tol);
        emit(side == Side::Sub ? "viscosity_sub.csv" : "viscosity_super.csv",
             rep.to_csv());
        if (!rep.pass) {
          std::ostringstream os;
          os << "viscosity " << (side == Side::Sub ? "sub" : "super")
             << " check failed: worst violation " << rep.worst_violation
             << " (touches: " << rep.touch_count << ")";
          result.violations.push_back(os.str());
        }
      }
    }
  }

  std::sort(result.files.begin(), result.files.end());
  std::ostringstream manifest;
  for (const auto& name : result.files) {
    const std::string full = (fs::path(cfg.output_dir) / name).string();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_file(full)));
    manifest << buf << "  " << fs::file_size(full) << "  " << name << '\n';
  }
  write_text((fs::path(cfg.output_dir) / "manifest.txt").string(),
             manifest.str());
  result.files.push_back("manifest.txt");
  return result;
}

SeparationReport separation_report(const ScenarioConfig& a,
                                   const ScenarioConfig& b) {
  if (a.preset != b.preset)
    throw std::invalid_argument("separation_report needs a shared group");
  const CarnotGroup g = make_group(a);
  const Grid grid_a = make_grid(a, g);
  const Grid grid_b = make_grid(b, g);
  if (!grid_a.same_layout(grid_b))
    throw std::invalid_argument("separation_report needs matching grids");
  FlowParams flow = a.flow;

  Trajectory ta = run_flow(g, make_initial(a, g, grid_a), flow);
  Trajectory tb = run_flow(g, make_initial(b, g, grid_b), flow);

  SeparationReport rep;
  rep.header =
      "t,contained,right_gauge_separation (approximate: gauge proxy for the "
      "right-invariant CC distance)";
  const std::size_t count = std::min(ta.snapshots.size(), tb.snapshots.size());
  for (std::size_t s = 0; s < count; ++s) {
    const ScalarField& ua = ta.snapshots[s];
    const ScalarField& ub = tb.snapshots[s];
    SeparationRow row;
    row.t = ua.time;
    row.contained = true;
    for (std::int64_t i = 0; i < ua.values.size() && row.contained; ++i)
      if (ua.values[i] <= 0.0 && ub.values[i] > 0.0) row.contained = false;

    LevelSetExtract ea = extract_zero_level(ua);
    LevelSetExtract eb = extract_zero_level(ub);
    if (ea.empty() || eb.empty()) {
      row.separation = -1.0;
    } else {
      auto sample = [&](const LevelSetExtract& e, const Grid& grid) {
        std::vector<Eigen::VectorXd> pts;
        const std::size_t stride = std::max<std::size_t>(
            1, e.crossings.size() / 1500);
        for (std::size_t i = 0; i < e.crossings.size(); i += stride)
          pts.push_back(crossing_point(grid, e.crossings[i]));
        return pts;
      };
      const auto pa = sample(ea, grid_a);
      const auto pb = sample(eb, grid_b);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& x : pa)
        for (const auto& y : pb)
          best = std::min(best, g.right_distance(x, y));
      row.separation = best;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<std::string> verify_manifest(const std::string& dir) {
  std::vector<std::string> bad;
  std::ifstream in((fs::path(dir) / "manifest.txt").string());
  if (!in) {
    bad.push_back("manifest.txt missing");
    return bad;
  }
  std::string hash_s, name;
  std::uint64_t size = 0;
  while (in >> hash_s >> size >> name) {
    const std::string full = (fs::path(dir) / name).string();
    if (!fs::exists(full)) {
      bad.push_back(name + " missing");
      continue;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash_file(full)));
    if (hash_s != buf || fs::file_size(full) != size)
      bad.push_back(name + " modified");
  }
  return bad;
}

}  // namespace cmcf
