#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmcf/field.hpp"
#include "cmcf/flow.hpp"
#include "cmcf/group.hpp"

namespace cmcf {

/// One experiment: sectioned key=value text with [group] [grid] [initial]
/// [flow] [output] and an optional [viscosity] block. See the README for
/// the grammar.
struct ScenarioConfig {
  std::string preset;

  Eigen::VectorXd grid_min;
  Eigen::VectorXd grid_max;
  Eigen::VectorXd grid_h;

  std::string initial_kind;  // cylinder | plane | blob | graph | custom
  double radius = 1.0;
  double cap = 1.0;
  int plane_k = 0;  // 1-based coordinate index, as in the config text
  bool plane_squared = false;
  std::string plane_profile = "linear";  // linear | cubic
  Eigen::VectorXd blob_center;
  std::string graph_expr;
  std::string custom_path;

  FlowParams flow;
  std::vector<std::pair<double, double>> schedule;  // (delta_k, eps_k)

  std::string output_dir = "out";
  std::vector<std::string> metrics = {"sup", "inf", "lip_right",
                                      "mask_fraction"};

  bool viscosity_enabled = false;
  std::string viscosity_family = "cylinder_adapted";
  double viscosity_tol_c = 5.0;
};

struct ParseResult {
  std::optional<ScenarioConfig> config;
  std::string error;
  int line = 0;

  bool ok() const { return config.has_value(); }
};

ParseResult parse_config(const std::string& text);
ParseResult load_config(const std::string& path);

CarnotGroup make_group(const ScenarioConfig& cfg);
Grid make_grid(const ScenarioConfig& cfg, const CarnotGroup& g);
ScalarField make_initial(const ScenarioConfig& cfg, const CarnotGroup& g,
                         const Grid& grid);

}  // namespace cmcf
