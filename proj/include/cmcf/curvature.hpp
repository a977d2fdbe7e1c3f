#pragma once

#include "cmcf/field_calculus.hpp"

#include <cstdint>
#include <vector>

namespace cmcf {

/// Nodes where the horizontal gradient falls below the threshold tau; the
/// curvature operators carry no value there.
struct CharMask {
  std::vector<std::uint8_t> masked;
  double tau = 0.0;

  bool operator[](std::int64_t flat) const { return masked[flat] != 0; }
  double fraction() const;
  /// 0/1 field for export in the snapshot format.
  ScalarField to_field(const Grid& grid) const;
};

/// A_ij(xi) = delta_ij - xi_i xi_j / (|xi|^2 + rho) + sigma delta_ij.
/// Symmetric with eigenvalues in [rho/(|xi|^2+rho) + sigma, 1 + sigma].
Eigen::MatrixXd coeff_matrix(const Eigen::VectorXd& xi, double rho,
                             double sigma);

struct CurvatureField {
  ScalarField values;  // meaningful off the mask only
  CharMask mask;
};

/// Horizontal mean curvature of the level sets of u, computed off the mask
/// as the projected contraction of the symmetrised horizontal second
/// derivatives divided by |grad_0 u|.
CurvatureField horizontal_mean_curvature(const CarnotGroup& g,
                                         const ScalarField& u, double tau);

/// Riemannian (epsilon-frame) mean curvature; converges to the horizontal
/// one off the characteristic set as eps -> 0.
CurvatureField riemannian_mean_curvature(const CarnotGroup& g,
                                         const ScalarField& u, double eps,
                                         double tau);

}  // namespace cmcf
