#pragma once

#include <cstdint>
#include <string>

#include "cmcf/field.hpp"
#include "cmcf/group.hpp"

namespace cmcf {

/// C^2 cut-off: psi(s) = (s-2)^3 on [0,2], 0 beyond. -8 <= psi <= 0,
/// psi' >= 0, |psi''| <= 2 sqrt(3) sqrt(psi') <= 12.
double psi(double s);
double psi_prime(double s);
double psi_second(double s);

/// u_0(x,t) = |x_H|^2 / 2 + (m-1) t, the level-set function of the
/// self-shrinking cylinder. Needs m >= 2.
double cylinder_value(const CarnotGroup& g, const Point& x, double t);

/// t* = R_0^2 / (2 (m-1)).
double extinction_time(double r0, int m);

enum class BarrierKind { Cylinder, Plane, PlaneSquared };

BarrierKind barrier_kind_from_string(const std::string& s);

/// Closed-form barrier/solution family from the paper's stationary planes
/// and shrinking cylinder.
struct Barrier {
  BarrierKind kind = BarrierKind::Cylinder;
  int k = -1;  // coordinate index for the plane kinds
  const CarnotGroup* group = nullptr;

  double value(const Point& x, double t) const;
};

/// Coordinate-plane barrier u = x_k (or x_k^2). Rejects d(k) = 3: the
/// plane x_4 = 0 in the Engel group is not minimal.
Barrier plane_values(const CarnotGroup& g, int k, bool squared = false);

Barrier cylinder_barrier(const CarnotGroup& g);

/// Analytic horizontal gradient of x_k, d(k) = 2: X_i(x_k) read off the
/// coefficient tables (linear in the horizontal coordinates).
Eigen::VectorXd plane_horizontal_gradient(const CarnotGroup& g, int k,
                                          const Point& x);

/// w_k^delta(x,t) = psi(u_k(x,t)) - C_0 sqrt(delta) t. Only the bounded
/// kinds (cylinder, squared plane) may be composed with psi.
double barrier_w(const CarnotGroup& g, BarrierKind kind, int k, double delta,
                 double c0, const Point& x, double t);

struct BarrierResidualReport {
  double max_residual = 0.0;  // max over sampled nodes/times of LHS - RHS
  double at_time = 0.0;
  std::int64_t at_node = -1;
  double slack = 0.0;
  bool pass = false;
};

/// Discrete check that w_k^delta is a subsolution of the delta^2-regularised
/// equation: max over interior nodes and sample times of
///   d_t w - sum_ij (delta_ij - Xi w Xj w / (|grad_eps w|^2 + delta^2)) XiXj w.
/// Requires eps^2 <= delta^{9/2}. Passes when the max is below slack.
BarrierResidualReport barrier_subsolution_residual(const CarnotGroup& g,
                                                   BarrierKind kind, int k,
                                                   double delta, double eps,
                                                   double c0, const Grid& grid,
                                                   double slack);

/// Smallest C_0 (by doubling plus bisection) for which the residual check
/// passes; deterministic for fixed inputs.
double calibrate_barrier_constant(const CarnotGroup& g, BarrierKind kind,
                                  int k, double delta, double eps,
                                  const Grid& grid, double slack);

}  // namespace cmcf
