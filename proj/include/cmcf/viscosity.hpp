#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cmcf/field.hpp"
#include "cmcf/flow.hpp"
#include "cmcf/group.hpp"

namespace cmcf {

enum class ConvDirection { Sup, Inf };

struct ConvolvedField {
  ScalarField values;
  double mu = 0.0;
  ConvDirection direction = ConvDirection::Sup;
};

/// u^mu(x) = max_y (u(y) - |y^{-1} x|^{2r!} / (2 mu)) over grid nodes;
/// candidates outside the gauge window of radius (2 mu osc(u))^{1/2r!}
/// cannot win and are skipped.
ConvolvedField sup_convolution(const CarnotGroup& g, const ScalarField& u,
                               double mu);
ConvolvedField inf_convolution(const CarnotGroup& g, const ScalarField& u,
                               double mu);

/// Most negative eigenvalue of the centred Euclidean second-difference
/// Hessian over interior nodes; u is semiconvex with constant C iff the
/// result is >= -2C.
double semiconvexity_modulus(const ScalarField& u);

enum class Side { Sub, Super };

/// Tight value of the degenerate-branch test over |p| <= 1:
///   sub:   max_p [tr R - p^T R p] = tr R - min(0, lambda_min(R))
///   super: min_p [tr R - p^T R p] = tr R - max(0, lambda_max(R)).
double degenerate_branch_bound(const Eigen::MatrixXd& r, Side side);

/// Quadratic space-time test function
///   phi(x,t) = c + b.(x-z) + (x-z)^T Q (x-z)/2
///            + beta (t-t0) + gamma (t-t0)^2,
/// with exact frame jets evaluated through the coefficient tables.
struct TestFunction {
  Eigen::VectorXd center;
  Eigen::VectorXd lin;
  Eigen::MatrixXd quad;
  double constant = 0.0;
  double t0 = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  double value(const Eigen::VectorXd& x, double t) const;
  double dt(double t) const { return beta + 2.0 * gamma * (t - t0); }
  Eigen::VectorXd horizontal_gradient(const CarnotGroup& g,
                                      const Eigen::VectorXd& x) const;
  /// Symmetrised horizontal second-derivative matrix (X_i X_j phi)*.
  Eigen::MatrixXd horizontal_hessian(const CarnotGroup& g,
                                     const Eigen::VectorXd& x) const;
};

/// Named families; "cylinder_adapted" carries members that touch shrinking
/// cylinder trajectories on both sides, "euclidean_paraboloids" is a generic
/// lattice of centred paraboloids.
std::vector<TestFunction> make_test_family(const CarnotGroup& g,
                                           const Grid& grid,
                                           const std::string& name,
                                           double t_mid);

struct TouchRecord {
  std::int64_t node = -1;
  int time_index = -1;
  double t = 0.0;
  bool degenerate = false;
  double violation = 0.0;  // positive = the side inequality fails
};

struct ViscosityCheckReport {
  Side side = Side::Sub;
  double worst_violation = -1e300;
  TouchRecord worst;
  std::int64_t touch_count = 0;
  std::vector<TouchRecord> flagged;  // touches with violation > tol
  double tol = 0.0;
  bool pass = false;

  std::string to_csv() const;
};

/// Scans every strict space-time local max (sub) / min (super) of u - phi
/// over interior nodes and checks the corresponding jet inequality of the
/// weak-solution definition at tolerance tol.
ViscosityCheckReport viscosity_residual_check(
    const CarnotGroup& g, const Trajectory& traj,
    const std::vector<TestFunction>& family, double tau, Side side,
    double tol);

/// Sup norms |u^mu - u| for a decreasing sequence of mu.
std::vector<double> convergence_to_base(const CarnotGroup& g,
                                        const ScalarField& u,
                                        const std::vector<double>& mus);

}  // namespace cmcf
