#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cmcf/field_calculus.hpp"

namespace cmcf {

enum class FlowMode { LevelSet, Graph };

struct FlowParams {
  double eps = 0.0;
  double delta = 1e-6;  // regulariser added to |grad_eps u|^2
  double sigma = 0.0;   // extra sigma * identity in the coefficient matrix
  double cfl = 0.25;    // in (0, 0.5]
  double t_end = 1.0;
  int snapshot_every = 100;
  double tau = 0.0;  // characteristic threshold; 0 = max grid spacing
  FlowMode mode = FlowMode::LevelSet;

  double tau_or_default(const Grid& grid) const {
    return tau > 0.0 ? tau : grid.max_spacing();
  }
  void validate() const;
};

struct StepMetrics {
  std::int64_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  double sup = 0.0;
  double inf = 0.0;
  double lip_right = 0.0;
  double mask_fraction = 0.0;
};

struct Trajectory {
  std::vector<ScalarField> snapshots;
  std::vector<StepMetrics> metrics;

  const ScalarField& at_time(double t) const;  // nearest snapshot
};

/// Explicit-scheme step size: cfl * min_k h_k^2 / (n * L^2) where L bounds
/// every |a_ik^eps| over the box.
double cfl_dt(const Grid& grid, const CarnotGroup& g, const FlowParams& params,
              const ScalarField& field);

/// One explicit Euler step of the regularised level-set equation
///   du/dt = sum_ij A_ij^{eps,delta,sigma}(grad_eps u) (X_i^eps X_j^eps u)*
/// with coefficients frozen at each node. dt <= 0 recomputes cfl_dt.
ScalarField step_level_set(const CarnotGroup& g, const ScalarField& u,
                           const FlowParams& params, double dt = 0.0);

/// One step of the graph flow over the base group (denominator 1 + |grad|^2,
/// horizontal frame only, never degenerate).
ScalarField step_graph_flow(const CarnotGroup& g, const ScalarField& u,
                            const FlowParams& params, double dt = 0.0);

/// Runs the flow to t_end, recording per-step metrics and snapshots at the
/// configured cadence (plus the initial and final fields). Deterministic:
/// identical inputs give bitwise identical trajectories.
Trajectory run_flow(const CarnotGroup& g, const ScalarField& initial,
                    const FlowParams& params);

struct CauchyReport {
  std::vector<double> sup_differences;  // d_k between consecutive runs
  bool decreasing() const;
};

/// Runs the flow for each (delta_k, eps_k) of the schedule and reports the
/// interior sup-norm difference between consecutive solutions at matched
/// snapshot times. The ratios eps_k/delta_k must decrease strictly.
std::pair<std::vector<Trajectory>, CauchyReport> vanishing_viscosity_run(
    const CarnotGroup& g, const ScalarField& initial,
    const std::vector<std::pair<double, double>>& schedule,  // (delta, eps)
    const FlowParams& base);

struct ComparisonReport {
  double max_violation = 0.0;  // max over recorded times of (u_f - u_g)+
  double at_time = 0.0;
  std::int64_t at_node = -1;
};

/// Evolves both initial conditions and reports how far the discrete flow
/// strays from order preservation u_f <= u_g.
ComparisonReport comparison_check(const CarnotGroup& g, const ScalarField& f,
                                  const ScalarField& g_data,
                                  const FlowParams& params);

/// Sup over nodes of the right-frame horizontal gradient magnitude -- the
/// discrete right-invariant Lipschitz seminorm.
double lipschitz_seminorm(const CarnotGroup& g, const ScalarField& u);

}  // namespace cmcf
