#include "cmcf/levelset.hpp"

#include <algorithm>

namespace cmcf {

LevelSetExtract extract_zero_level(const ScalarField& field) {
  LevelSetExtract out;
  out.time = field.time;
  const Grid& grid = field.grid;
  const auto strides = grid.strides();
  NodeIter it(grid);
  std::int64_t flat = 0;
  do {
    const double u0 = field.values[flat];
    for (int axis = 0; axis < grid.dims(); ++axis) {
      if (it.index()[axis] + 1 >= grid.counts[axis]) continue;
      const double u1 = field.values[flat + strides[axis]];
      // Zeros count as nonnegative so each crossing registers exactly once.
      if ((u0 < 0.0) == (u1 < 0.0)) continue;
      const double frac = std::clamp(u0 / (u0 - u1), 0.0, 1.0);
      out.crossings.push_back({flat, axis, frac});
    }
    ++flat;
  } while (it.next());
  return out;
}

Eigen::VectorXd crossing_point(const Grid& grid,
                               const LevelSetExtract::Crossing& c) {
  Eigen::VectorXd x = grid.node(c.node);
  x[c.axis] += c.fraction * grid.spacing[c.axis];
  return x;
}

std::optional<double> measure_radius(const LevelSetExtract& extract,
                                     const Grid& grid, const CarnotGroup& g,
                                     double* mean_out) {
  if (extract.empty()) return std::nullopt;
  std::vector<double> radii;
  radii.reserve(extract.crossings.size());
  double sum = 0.0;
  for (const auto& c : extract.crossings) {
    const Eigen::VectorXd x = crossing_point(grid, c);
    const double r = x.head(g.horizontal_dim()).norm();
    radii.push_back(r);
    sum += r;
  }
  if (mean_out) *mean_out = sum / static_cast<double>(radii.size());
  auto mid = radii.begin() + static_cast<std::ptrdiff_t>(radii.size() / 2);
  std::nth_element(radii.begin(), mid, radii.end());
  return *mid;
}

}  // namespace cmcf
