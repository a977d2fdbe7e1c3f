#include "cmcf/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cmcf/barriers.hpp"
#include "cmcf/snapshot.hpp"

namespace cmcf {
namespace {

struct Cursor {
  int line = 0;
  std::string error;
  bool failed = false;

  void fail(int at, const std::string& msg) {
    if (failed) return;
    failed = true;
    line = at;
    error = msg;
  }
};

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_int(const std::string& s, int& out) {
  try {
    std::size_t used = 0;
    out = std::stoi(s, &used);
    return used == s.size();
  } catch (const std::exception&) {
    return false;
  }
}

bool parse_vector(const std::string& s, Eigen::VectorXd& out) {
  std::vector<double> vals;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    double v;
    if (!parse_double(trim(tok), v)) return false;
    vals.push_back(v);
  }
  if (vals.empty()) return false;
  out.resize(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    out[static_cast<int>(i)] = vals[i];
  return true;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ScenarioConfig cfg;
  Cursor cur;
  std::string section;
  bool seen_group = false, seen_grid = false, seen_initial = false,
       seen_flow = false, seen_output = false;

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        cur.fail(lineno, "malformed section header");
        break;
      }
      section = line.substr(1, line.size() - 2);
      if (section == "group")
        seen_group = true;
      else if (section == "grid")
        seen_grid = true;
      else if (section == "initial")
        seen_initial = true;
      else if (section == "flow")
        seen_flow = true;
      else if (section == "output")
        seen_output = true;
      else if (section != "viscosity") {
        cur.fail(lineno, "unknown section [" + section + "]");
        break;
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      cur.fail(lineno, "expected key = value");
      break;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto bad_value = [&] { cur.fail(lineno, "bad value for '" + key + "'"); };

    if (section == "group") {
      if (key == "preset")
        cfg.preset = value;
      else
        cur.fail(lineno, "unknown key '" + key + "' in [group]");
    } else if (section == "grid") {
      if (key == "min") {
        if (!parse_vector(value, cfg.grid_min)) bad_value();
      } else if (key == "max") {
        if (!parse_vector(value, cfg.grid_max)) bad_value();
      } else if (key == "h") {
        if (!parse_vector(value, cfg.grid_h)) bad_value();
      } else {
        cur.fail(lineno, "unknown key '" + key + "' in [grid]");
      }
    } else if (section == "initial") {
      if (key == "kind")
        cfg.initial_kind = value;
      else if (key == "radius") {
        if (!parse_double(value, cfg.radius)) bad_value();
      } else if (key == "cap") {
        if (!parse_double(value, cfg.cap)) bad_value();
      } else if (key == "k") {
        if (!parse_int(value, cfg.plane_k)) bad_value();
      } else if (key == "squared") {
        cfg.plane_squared = (value == "true" || value == "1");
      } else if (key == "profile") {
        if (value != "linear" && value != "cubic")
          bad_value();
        else
          cfg.plane_profile = value;
      } else if (key == "center") {
        if (!parse_vector(value, cfg.blob_center)) bad_value();
      } else if (key == "expr") {
        cfg.graph_expr = value;
      } else if (key == "path") {
        cfg.custom_path = value;
      } else {
        cur.fail(lineno, "unknown key '" + key + "' in [initial]");
      }
    } else if (section == "flow") {
      if (key == "mode") {
        if (value == "level_set")
          cfg.flow.mode = FlowMode::LevelSet;
        else if (value == "graph")
          cfg.flow.mode = FlowMode::Graph;
        else
          bad_value();
      } else if (key == "epsilon") {
        if (!parse_double(value, cfg.flow.eps)) bad_value();
      } else if (key == "delta") {
        if (!parse_double(value, cfg.flow.delta)) bad_value();
      } else if (key == "sigma") {
        if (!parse_double(value, cfg.flow.sigma)) bad_value();
      } else if (key == "cfl") {
        if (!parse_double(value, cfg.flow.cfl)) bad_value();
      } else if (key == "t_end") {
        if (!parse_double(value, cfg.flow.t_end)) bad_value();
      } else if (key == "snapshot_every") {
        if (!parse_int(value, cfg.flow.snapshot_every)) bad_value();
      } else if (key == "tau") {
        if (value == "auto")
          cfg.flow.tau = 0.0;
        else if (!parse_double(value, cfg.flow.tau))
          bad_value();
      } else if (key == "schedule") {
        cfg.schedule.clear();
        std::istringstream ss(value);
        std::string tok;
        bool ok = true;
        while (std::getline(ss, tok, ',')) {
          auto colon = tok.find(':');
          double d, e;
          ok = ok && colon != std::string::npos &&
               parse_double(trim(tok.substr(0, colon)), d) &&
               parse_double(trim(tok.substr(colon + 1)), e);
          if (!ok) break;
          cfg.schedule.emplace_back(d, e);
        }
        if (!ok || cfg.schedule.empty()) bad_value();
      } else {
        cur.fail(lineno, "unknown key '" + key + "' in [flow]");
      }
    } else if (section == "output") {
      if (key == "dir")
        cfg.output_dir = value;
      else if (key == "metrics") {
        cfg.metrics.clear();
        std::istringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.metrics.push_back(trim(tok));
      } else {
        cur.fail(lineno, "unknown key '" + key + "' in [output]");
      }
    } else if (section == "viscosity") {
      if (key == "enabled")
        cfg.viscosity_enabled = (value == "true" || value == "1");
      else if (key == "family")
        cfg.viscosity_family = value;
      else if (key == "tol_c") {
        if (!parse_double(value, cfg.viscosity_tol_c)) bad_value();
      } else {
        cur.fail(lineno, "unknown key '" + key + "' in [viscosity]");
      }
    } else {
      cur.fail(lineno, "key outside any section");
    }
    if (cur.failed) break;
  }

  ParseResult res;
  if (cur.failed) {
    res.error = cur.error;
    res.line = cur.line;
    return res;
  }
  auto missing = [&](const char* name) {
    res.error = std::string("missing section [") + name + "]";
    return res;
  };
  if (!seen_group) return missing("group");
  if (!seen_grid) return missing("grid");
  if (!seen_initial) return missing("initial");
  if (!seen_flow) return missing("flow");
  if (!seen_output) return missing("output");

  // Cross-field validation: everything that can be checked without running.
  try {
    CarnotGroup g = make_group(cfg);
    Grid grid = make_grid(cfg, g);
    make_initial(cfg, g, grid);
    cfg.flow.validate();
    if (!cfg.schedule.empty()) {
      for (std::size_t k = 1; k < cfg.schedule.size(); ++k) {
        const double prev = cfg.schedule[k - 1].second / cfg.schedule[k - 1].first;
        const double here = cfg.schedule[k].second / cfg.schedule[k].first;
        if (!(here < prev))
          throw std::invalid_argument(
              "schedule must have strictly decreasing eps_k/delta_k");
      }
    }
  } catch (const std::exception& e) {
    res.error = e.what();
    return res;
  }
  res.config = std::move(cfg);
  return res;
}

ParseResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult res;
    res.error = "cannot open config file " + path;
    return res;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

CarnotGroup make_group(const ScenarioConfig& cfg) {
  if (cfg.preset.empty())
    throw std::invalid_argument("[group] preset is required");
  return CarnotGroup::from_preset(cfg.preset);
}

Grid make_grid(const ScenarioConfig& cfg, const CarnotGroup& g) {
  const int n = g.dim();
  auto expand = [&](const Eigen::VectorXd& v,
                    const char* what) -> Eigen::VectorXd {
    if (v.size() == n) return v;
    if (v.size() == 1) return Eigen::VectorXd::Constant(n, v[0]);
    throw std::invalid_argument(std::string("[grid] ") + what +
                                " must list 1 or n values");
  };
  if (cfg.grid_min.size() == 0 || cfg.grid_max.size() == 0 ||
      cfg.grid_h.size() == 0)
    throw std::invalid_argument("[grid] needs min, max and h");
  return Grid::box(expand(cfg.grid_min, "min"), expand(cfg.grid_max, "max"),
                   expand(cfg.grid_h, "h"));
}

ScalarField make_initial(const ScenarioConfig& cfg, const CarnotGroup& g,
                         const Grid& grid) {
  const int m = g.horizontal_dim();
  if (cfg.initial_kind == "cylinder") {
    if (m < 2)
      throw std::invalid_argument("cylinder initial data needs m >= 2");
    const double r2 = cfg.radius * cfg.radius;
    return make_field(
        grid,
        [&](const Eigen::VectorXd& x) {
          return std::min(0.5 * x.head(m).squaredNorm() - 0.5 * r2, cfg.cap);
        },
        cfg.cap);
  }
  if (cfg.initial_kind == "plane") {
    const int k = cfg.plane_k - 1;  // config uses 1-based coordinates
    Barrier b = plane_values(g, k, cfg.plane_squared);
    const bool cubic = cfg.plane_profile == "cubic";
    return make_field(grid, [&, k, cubic](const Eigen::VectorXd& x) {
      double v = b.value(x, 0.0);
      (void)k;
      if (cubic) v += v * v * v / 3.0;
      return v;
    });
  }
  if (cfg.initial_kind == "blob") {
    Eigen::VectorXd c = cfg.blob_center.size() == g.dim()
                            ? cfg.blob_center
                            : Eigen::VectorXd::Zero(g.dim());
    const double r2 = cfg.radius * cfg.radius;
    return make_field(
        grid,
        [&](const Eigen::VectorXd& x) {
          return std::min((x - c).squaredNorm() - r2, cfg.cap);
        },
        cfg.cap);
  }
  if (cfg.initial_kind == "graph") {
    std::istringstream ss(cfg.graph_expr);
    std::string id;
    std::getline(ss, id, ':');
    if (id == "gaussian") {
      std::string a_s, s_s;
      std::getline(ss, a_s, ':');
      std::getline(ss, s_s, ':');
      const double amp = std::stod(a_s);
      const double s0 = std::stod(s_s);
      return make_field(grid, [&](const Eigen::VectorXd& x) {
        return amp * std::exp(-x.squaredNorm() / (2.0 * s0 * s0));
      });
    }
    if (id == "linear") {
      std::string k_s;
      std::getline(ss, k_s, ':');
      const int k = std::stoi(k_s) - 1;
      if (k < 0 || k >= g.dim())
        throw std::invalid_argument("graph linear index out of range");
      return make_field(grid,
                        [&, k](const Eigen::VectorXd& x) { return x[k]; });
    }
    throw std::invalid_argument("unknown graph expression '" + cfg.graph_expr +
                                "'");
  }
  if (cfg.initial_kind == "custom") {
    ScalarField f = read_snapshot(cfg.custom_path);
    if (!f.grid.same_layout(grid))
      throw std::invalid_argument("custom snapshot grid does not match [grid]");
    return f;
  }
  throw std::invalid_argument("unknown initial kind '" + cfg.initial_kind +
                              "'");
}

}  // namespace cmcf
