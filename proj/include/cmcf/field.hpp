#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

#include "cmcf/grid.hpp"

namespace cmcf {

/// Grid-sampled scalar function with a constant value outside the box.
struct ScalarField {
  Grid grid;
  Eigen::ArrayXd values;
  double far_field = 0.0;
  double time = 0.0;

  ScalarField() = default;
  ScalarField(Grid g, double far = 0.0, double t = 0.0)
      : grid(std::move(g)),
        values(Eigen::ArrayXd::Zero(grid.num_nodes())),
        far_field(far),
        time(t) {}

  double& at(std::int64_t flat) { return values[flat]; }
  double at(std::int64_t flat) const { return values[flat]; }

  double sup() const { return values.maxCoeff(); }
  double inf() const { return values.minCoeff(); }
  double osc() const { return sup() - inf(); }
};

/// Samples f over the grid.
inline ScalarField make_field(const Grid& grid,
                              const std::function<double(const Eigen::VectorXd&)>& f,
                              double far_field = 0.0, double time = 0.0) {
  ScalarField out(grid, far_field, time);
  NodeIter it(grid);
  std::int64_t flat = 0;
  do {
    out.values[flat++] = f(grid.node(it.index()));
  } while (it.next());
  return out;
}

/// Per-node vectors, e.g. the horizontal gradient (X_1 u, ..., X_m u).
struct VectorField {
  Grid grid;
  Eigen::MatrixXd values;  // num_nodes x components

  VectorField() = default;
  VectorField(Grid g, int components)
      : grid(std::move(g)),
        values(Eigen::MatrixXd::Zero(grid.num_nodes(), components)) {}

  int components() const { return static_cast<int>(values.cols()); }
};

/// Multilinear interpolation at a physical point; the point must lie in the
/// hull of the grid nodes.
inline double interpolate(const ScalarField& field, const Eigen::VectorXd& p) {
  const Grid& g = field.grid;
  const int n = g.dims();
  Eigen::VectorXi base(n);
  Eigen::VectorXd w(n);
  for (int k = 0; k < n; ++k) {
    double rel = (p[k] - g.origin[k]) / g.spacing[k];
    if (rel < -1e-9 || rel > g.counts[k] - 1 + 1e-9)
      throw std::out_of_range("interpolation point outside the grid");
    int cell = static_cast<int>(std::floor(rel));
    cell = std::max(0, std::min(cell, g.counts[k] - 2));
    base[k] = cell;
    w[k] = rel - cell;
  }
  const auto strides = g.strides();
  std::int64_t flat0 = g.flatten(base);
  double acc = 0.0;
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    double weight = 1.0;
    std::int64_t flat = flat0;
    for (int k = 0; k < n; ++k) {
      if (corner & (1u << k)) {
        weight *= w[k];
        flat += strides[k];
      } else {
        weight *= 1.0 - w[k];
      }
    }
    acc += weight * field.values[flat];
  }
  return acc;
}

}  // namespace cmcf
