#include "cmcf/barriers.hpp"

#include <cmath>
#include <stdexcept>

#include "cmcf/field_calculus.hpp"

namespace cmcf {

double psi(double s) {
  if (s < 0.0) throw std::invalid_argument("psi needs s >= 0");
  if (s >= 2.0) return 0.0;
  const double d = s - 2.0;
  return d * d * d;
}

double psi_prime(double s) {
  if (s < 0.0) throw std::invalid_argument("psi needs s >= 0");
  if (s >= 2.0) return 0.0;
  const double d = s - 2.0;
  return 3.0 * d * d;
}

double psi_second(double s) {
  if (s < 0.0) throw std::invalid_argument("psi needs s >= 0");
  if (s >= 2.0) return 0.0;
  return 6.0 * (s - 2.0);
}

double cylinder_value(const CarnotGroup& g, const Point& x, double t) {
  const int m = g.horizontal_dim();
  if (m < 2)
    throw std::invalid_argument("cylinder barrier needs at least 2 horizontal "
                                "directions");
  return 0.5 * x.head(m).squaredNorm() + (m - 1) * t;
}

double extinction_time(double r0, int m) {
  if (m < 2) throw std::invalid_argument("extinction time needs m >= 2");
  if (!(r0 > 0.0)) throw std::invalid_argument("radius must be positive");
  return r0 * r0 / (2.0 * (m - 1));
}

BarrierKind barrier_kind_from_string(const std::string& s) {
  if (s == "cylinder") return BarrierKind::Cylinder;
  if (s == "plane") return BarrierKind::Plane;
  if (s == "plane_squared") return BarrierKind::PlaneSquared;
  throw std::invalid_argument("unknown barrier kind '" + s + "'");
}

double Barrier::value(const Point& x, double t) const {
  switch (kind) {
    case BarrierKind::Cylinder:
      return cylinder_value(*group, x, t);
    case BarrierKind::Plane:
      return x[k];
    case BarrierKind::PlaneSquared:
      return x[k] * x[k];
  }
  throw std::logic_error("unreachable");
}

Barrier plane_values(const CarnotGroup& g, int k, bool squared) {
  if (k < 0 || k >= g.dim()) throw std::out_of_range("plane index");
  if (g.weight(k) > 2)
    throw std::invalid_argument(
        "coordinate planes of weight 3 are not minimal (Engel x_4)");
  Barrier b;
  b.kind = squared ? BarrierKind::PlaneSquared : BarrierKind::Plane;
  b.k = k;
  b.group = &g;
  return b;
}

Barrier cylinder_barrier(const CarnotGroup& g) {
  if (g.horizontal_dim() < 2)
    throw std::invalid_argument("cylinder barrier needs m >= 2");
  Barrier b;
  b.kind = BarrierKind::Cylinder;
  b.group = &g;
  return b;
}

Eigen::VectorXd plane_horizontal_gradient(const CarnotGroup& g, int k,
                                          const Point& x) {
  if (g.weight(k) != 2)
    throw std::invalid_argument("analytic plane gradient expects d(k) = 2");
  Eigen::VectorXd grad(g.horizontal_dim());
  for (int i = 0; i < g.horizontal_dim(); ++i)
    grad[i] = g.vf_coeffs(Frame::Left, i, x)[k];
  return grad;
}

double barrier_w(const CarnotGroup& g, BarrierKind kind, int k, double delta,
                 double c0, const Point& x, double t) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (!(c0 > 0.0)) throw std::invalid_argument("C_0 must be > 0");
  double u;
  switch (kind) {
    case BarrierKind::Cylinder:
      u = cylinder_value(g, x, t);
      break;
    case BarrierKind::PlaneSquared:
      if (k < 0 || k >= g.dim() || g.weight(k) != 2)
        throw std::invalid_argument("squared-plane barrier needs d(k) = 2");
      u = x[k] * x[k];
      break;
    default:
      throw std::invalid_argument("barrier_w: invalid kind (psi needs a "
                                  "nonnegative barrier)");
  }
  return psi(u) - c0 * std::sqrt(delta) * t;
}

BarrierResidualReport barrier_subsolution_residual(const CarnotGroup& g,
                                                   BarrierKind kind, int k,
                                                   double delta, double eps,
                                                   double c0, const Grid& grid,
                                                   double slack) {
  if (eps * eps > std::pow(delta, 4.5))
    throw std::invalid_argument("need eps^2 <= delta^{9/2}");
  if (kind == BarrierKind::Plane)
    throw std::invalid_argument("residual check: invalid kind");
  const int n = g.dim();
  const int m = g.horizontal_dim();
  const double root_delta = std::sqrt(delta);

  BarrierResidualReport rep;
  rep.slack = slack;
  rep.max_residual = -std::numeric_limits<double>::infinity();

  const double sample_times[] = {0.0, 0.25, 0.5, 1.0};
  for (double t : sample_times) {
    // Spatial field at this time; psi vanishes once the barrier argument
    // reaches 2, so far_field 0 is consistent on large boxes.
    ScalarField w = make_field(
        grid,
        [&](const Eigen::VectorXd& x) {
          const double u = (kind == BarrierKind::Cylinder)
                               ? cylinder_value(g, x, t)
                               : x[k] * x[k];
          return psi(u);
        },
        0.0, t);

    VectorField grad = eps_gradient(g, w, eps);
    std::vector<std::vector<ScalarField>> second(n);
    for (int i = 0; i < n; ++i) {
      second[i].resize(n);
      for (int j = i; j < n; ++j)
        second[i][j] = second_derivative(g, w, i, j, eps);
    }

    const double dt_u = (kind == BarrierKind::Cylinder) ? (m - 1.0) : 0.0;
    NodeIter it(grid);
    std::int64_t flat = 0;
    do {
      if (grid.is_interior(it.index(), 2)) {
        const Eigen::VectorXd x = grid.node(it.index());
        const double u = (kind == BarrierKind::Cylinder)
                             ? cylinder_value(g, x, t)
                             : x[k] * x[k];
        const double lhs = psi_prime(u) * dt_u - c0 * root_delta;
        const Eigen::VectorXd xi = grad.values.row(flat).transpose();
        const double denom = xi.squaredNorm() + delta * delta;
        double rhs = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double sij = second[std::min(i, j)][std::max(i, j)].values[flat];
            rhs += ((i == j ? 1.0 : 0.0) - xi[i] * xi[j] / denom) * sij;
          }
        const double res = lhs - rhs;
        if (res > rep.max_residual) {
          rep.max_residual = res;
          rep.at_time = t;
          rep.at_node = flat;
        }
      }
      ++flat;
    } while (it.next());
  }
  rep.pass = rep.max_residual <= slack;
  return rep;
}

double calibrate_barrier_constant(const CarnotGroup& g, BarrierKind kind,
                                  int k, double delta, double eps,
                                  const Grid& grid, double slack) {
  auto passes = [&](double c0) {
    return barrier_subsolution_residual(g, kind, k, delta, eps, c0, grid, slack)
        .pass;
  };
  double hi = 1.0;
  while (!passes(hi)) {
    hi *= 2.0;
    if (hi > 1e6)
      throw std::runtime_error("barrier constant calibration diverged");
  }
  double lo = hi / 2.0;
  for (int iter = 0; iter < 20 && hi - lo > 1e-2 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace cmcf
