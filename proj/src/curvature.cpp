#include "cmcf/curvature.hpp"

#include <stdexcept>

namespace cmcf {

double CharMask::fraction() const {
  if (masked.empty()) return 0.0;
  std::int64_t count = 0;
  for (auto b : masked) count += (b != 0);
  return static_cast<double>(count) / static_cast<double>(masked.size());
}

ScalarField CharMask::to_field(const Grid& grid) const {
  ScalarField out(grid, 0.0);
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(masked.size()); ++i)
    out.values[i] = masked[i] ? 1.0 : 0.0;
  return out;
}

Eigen::MatrixXd coeff_matrix(const Eigen::VectorXd& xi, double rho,
                             double sigma) {
  if (rho < 0.0 || sigma < 0.0)
    throw std::invalid_argument("regularisers must be nonnegative");
  const double s = xi.squaredNorm() + rho;
  if (s == 0.0)
    throw std::invalid_argument("coeff_matrix degenerate: rho = 0 and xi = 0");
  const int n = static_cast<int>(xi.size());
  Eigen::MatrixXd a = (1.0 + sigma) * Eigen::MatrixXd::Identity(n, n);
  a.noalias() -= xi * xi.transpose() / s;
  return a;
}

namespace {

CurvatureField curvature_impl(const CarnotGroup& g, const ScalarField& u,
                              double eps, double tau, bool horizontal_only) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  const int range = horizontal_only ? g.horizontal_dim() : g.dim();
  const std::int64_t nodes = u.grid.num_nodes();

  // First derivatives of the active frame directions.
  std::vector<ScalarField> first(range);
  for (int i = 0; i < range; ++i) {
    first[i] = apply_vf(g, u, Frame::Left, i);
    if (!horizontal_only && g.weight(i) > 1) first[i].values *= eps;
  }

  // Symmetrised nested second derivatives.
  std::vector<std::vector<ScalarField>> second(range);
  for (int i = 0; i < range; ++i) second[i].resize(range);
  for (int i = 0; i < range; ++i)
    for (int j = i; j < range; ++j) {
      ScalarField dij = apply_vf(g, first[j], Frame::Left, i);
      ScalarField dji = apply_vf(g, first[i], Frame::Left, j);
      double scale_i = (!horizontal_only && g.weight(i) > 1) ? eps : 1.0;
      double scale_j = (!horizontal_only && g.weight(j) > 1) ? eps : 1.0;
      ScalarField sym(u.grid, 0.0, u.time);
      sym.values = 0.5 * (scale_i * dij.values + scale_j * dji.values);
      second[i][j] = sym;
    }

  CurvatureField out;
  out.values = ScalarField(u.grid, 0.0, u.time);
  out.mask.tau = tau;
  out.mask.masked.assign(nodes, 0);

  // The mask always keys on the horizontal gradient: that is what defines
  // the characteristic set.
  Eigen::VectorXd xi(range);
  for (std::int64_t p = 0; p < nodes; ++p) {
    double hnorm2 = 0.0;
    for (int i = 0; i < g.horizontal_dim(); ++i)
      hnorm2 += first[i].values[p] * first[i].values[p];
    if (std::sqrt(hnorm2) < tau) {
      out.mask.masked[p] = 1;
      continue;
    }
    for (int i = 0; i < range; ++i) xi[i] = first[i].values[p];
    const double norm2 = xi.squaredNorm();
    const double norm = std::sqrt(norm2);
    double acc = 0.0;
    for (int i = 0; i < range; ++i)
      for (int j = 0; j < range; ++j) {
        const double sij = second[std::min(i, j)][std::max(i, j)].values[p];
        const double aij = (i == j ? 1.0 : 0.0) - xi[i] * xi[j] / norm2;
        acc += aij * sij;
      }
    out.values.values[p] = acc / norm;
  }
  return out;
}

}  // namespace

CurvatureField horizontal_mean_curvature(const CarnotGroup& g,
                                         const ScalarField& u, double tau) {
  return curvature_impl(g, u, 0.0, tau, /*horizontal_only=*/true);
}

CurvatureField riemannian_mean_curvature(const CarnotGroup& g,
                                         const ScalarField& u, double eps,
                                         double tau) {
  if (!(eps > 0.0))
    throw std::invalid_argument("riemannian curvature needs eps > 0");
  return curvature_impl(g, u, eps, tau, /*horizontal_only=*/false);
}

}  // namespace cmcf
