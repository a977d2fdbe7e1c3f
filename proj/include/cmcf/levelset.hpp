#pragma once

#include <optional>
#include <vector>

#include "cmcf/field.hpp"
#include "cmcf/group.hpp"

namespace cmcf {

/// Zero crossings of a field along grid edges, by linear interpolation of
/// sign changes. An empty crossing list witnesses extinction on the box.
struct LevelSetExtract {
  struct Crossing {
    std::int64_t node = 0;  // flat index of the lower edge endpoint
    int axis = 0;
    double fraction = 0.0;  // in [0, 1) along the edge
  };
  double time = 0.0;
  std::vector<Crossing> crossings;

  bool empty() const { return crossings.empty(); }
};

LevelSetExtract extract_zero_level(const ScalarField& field);

/// Physical coordinates of a crossing.
Eigen::VectorXd crossing_point(const Grid& grid,
                               const LevelSetExtract::Crossing& c);

/// Median of |x_H| over the crossing points; meaningful for
/// cylinder-symmetric level sets. Empty extract -> nullopt (extinction).
/// The mean is also reported when a pointer is supplied.
std::optional<double> measure_radius(const LevelSetExtract& extract,
                                     const Grid& grid, const CarnotGroup& g,
                                     double* mean_out = nullptr);

}  // namespace cmcf
