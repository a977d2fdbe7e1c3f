#include "cmcf/field_calculus.hpp"

#include <stdexcept>

#include "cmcf/parallel.hpp"

namespace cmcf {
namespace {

double read_shift(const ScalarField& u, const Eigen::VectorXi& idx,
                  std::int64_t flat, const std::vector<std::int64_t>& strides,
                  int axis, int delta) {
  const int j = idx[axis] + delta;
  if (j < 0 || j >= u.grid.counts[axis]) return u.far_field;
  return u.values[flat + delta * strides[axis]];
}

}  // namespace

ScalarField apply_vf(const CarnotGroup& g, const ScalarField& u, Frame frame,
                     int i) {
  if (i < 0 || i >= g.dim()) throw std::out_of_range("generator index");
  if (u.grid.dims() != g.dim())
    throw std::invalid_argument("field dimension does not match the group");
  const auto strides = u.grid.strides();
  ScalarField out(u.grid, 0.0, u.time);
  NodeIter it(u.grid);
  std::int64_t flat = 0;
  do {
    const Eigen::VectorXi& idx = it.index();
    const Eigen::VectorXd x = u.grid.node(idx);
    const Eigen::VectorXd a = g.vf_coeffs(frame, i, x);
    double acc = 0.0;
    for (int k = 0; k < g.dim(); ++k) {
      if (a[k] == 0.0) continue;
      const double dp = read_shift(u, idx, flat, strides, k, +1);
      const double dm = read_shift(u, idx, flat, strides, k, -1);
      acc += a[k] * (dp - dm) / (2.0 * u.grid.spacing[k]);
    }
    out.values[flat++] = acc;
  } while (it.next());
  return out;
}

ScalarField second_derivative(const CarnotGroup& g, const ScalarField& u,
                              int i, int j, double eps) {
  if (i > j) std::swap(i, j);  // canonical order: symmetric bit-for-bit
  double scale = 1.0;
  if (g.weight(i) > 1) scale *= eps;
  if (g.weight(j) > 1) scale *= eps;
  ScalarField out(u.grid, 0.0, u.time);
  if (scale == 0.0) return out;
  const ScalarField di = apply_vf(g, u, Frame::Left, i);
  const ScalarField dj = (i == j) ? di : apply_vf(g, u, Frame::Left, j);
  const ScalarField dij = apply_vf(g, dj, Frame::Left, i);
  const ScalarField dji = (i == j) ? dij : apply_vf(g, di, Frame::Left, j);
  out.values = scale * 0.5 * (dij.values + dji.values);
  return out;
}

VectorField horizontal_gradient(const CarnotGroup& g, const ScalarField& u) {
  VectorField out(u.grid, g.horizontal_dim());
  for (int i = 0; i < g.horizontal_dim(); ++i)
    out.values.col(i) = apply_vf(g, u, Frame::Left, i).values;
  return out;
}

VectorField eps_gradient(const CarnotGroup& g, const ScalarField& u,
                         double eps) {
  VectorField out(u.grid, g.dim());
  for (int i = 0; i < g.dim(); ++i) {
    if (g.weight(i) > 1 && eps == 0.0) continue;  // column stays zero
    ScalarField d = apply_vf(g, u, Frame::Left, i);
    out.values.col(i) = (g.weight(i) > 1 ? eps : 1.0) * d.values;
  }
  return out;
}

ScalarField magnitude(const VectorField& v) {
  ScalarField out(v.grid, 0.0);
  out.values = v.values.rowwise().norm().array();
  return out;
}

}  // namespace cmcf
