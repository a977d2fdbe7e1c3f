#include "cmcf/viscosity.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cmcf {
namespace {

ConvolvedField convolve(const CarnotGroup& g, const ScalarField& u, double mu,
                        ConvDirection dir) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be > 0");
  if (!u.values.allFinite())
    throw std::invalid_argument("convolution needs a bounded field");
  const Grid& grid = u.grid;
  const std::int64_t nodes = grid.num_nodes();
  const double cutoff = 2.0 * mu * u.osc();  // penalty beyond this cannot win
  const double sign = (dir == ConvDirection::Sup) ? 1.0 : -1.0;

  std::vector<Eigen::VectorXd> coords(static_cast<std::size_t>(nodes));
  {
    NodeIter it(grid);
    std::int64_t flat = 0;
    do {
      coords[static_cast<std::size_t>(flat++)] = grid.node(it.index());
    } while (it.next());
  }

  ConvolvedField out;
  out.mu = mu;
  out.direction = dir;
  out.values = ScalarField(grid, u.far_field, u.time);
  for (std::int64_t x = 0; x < nodes; ++x) {
    double best = sign * u.values[x];  // y = x has zero penalty
    for (std::int64_t y = 0; y < nodes; ++y) {
      if (y == x) continue;
      const double pen =
          g.gauge_power(g.multiply(g.inverse(coords[static_cast<std::size_t>(y)]),
                                   coords[static_cast<std::size_t>(x)]));
      if (pen > cutoff) continue;
      best = std::max(best, sign * u.values[y] - pen / (2.0 * mu));
    }
    out.values.values[x] = sign * best;
  }
  return out;
}

}  // namespace

ConvolvedField sup_convolution(const CarnotGroup& g, const ScalarField& u,
                               double mu) {
  return convolve(g, u, mu, ConvDirection::Sup);
}

ConvolvedField inf_convolution(const CarnotGroup& g, const ScalarField& u,
                               double mu) {
  return convolve(g, u, mu, ConvDirection::Inf);
}

double semiconvexity_modulus(const ScalarField& u) {
  const Grid& grid = u.grid;
  const int n = grid.dims();
  for (int k = 0; k < n; ++k)
    if (grid.counts[k] < 5)
      throw std::invalid_argument("semiconvexity needs >= 5 nodes per axis");
  const auto strides = grid.strides();
  double worst = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd hess(n, n);
  NodeIter it(grid);
  std::int64_t flat = 0;
  do {
    if (grid.is_interior(it.index(), 1)) {
      for (int l = 0; l < n; ++l) {
        const double hl = grid.spacing[l];
        hess(l, l) = (u.values[flat + strides[l]] - 2.0 * u.values[flat] +
                      u.values[flat - strides[l]]) /
                     (hl * hl);
        for (int k = l + 1; k < n; ++k) {
          const double hk = grid.spacing[k];
          const double cross =
              (u.values[flat + strides[l] + strides[k]] -
               u.values[flat + strides[l] - strides[k]] -
               u.values[flat - strides[l] + strides[k]] +
               u.values[flat - strides[l] - strides[k]]) /
              (4.0 * hl * hk);
          hess(l, k) = cross;
          hess(k, l) = cross;
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess,
                                                        Eigen::EigenvaluesOnly);
      worst = std::min(worst, es.eigenvalues().minCoeff());
    }
    ++flat;
  } while (it.next());
  return worst;
}

double degenerate_branch_bound(const Eigen::MatrixXd& r, Side side) {
  if (r.rows() != r.cols() ||
      (r - r.transpose()).lpNorm<Eigen::Infinity>() > 1e-12)
    throw std::invalid_argument("degenerate branch bound needs symmetric R");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  const double tr = r.trace();
  if (side == Side::Sub) return tr - std::min(0.0, es.eigenvalues().minCoeff());
  return tr - std::max(0.0, es.eigenvalues().maxCoeff());
}

double TestFunction::value(const Eigen::VectorXd& x, double t) const {
  const Eigen::VectorXd d = x - center;
  const double ts = t - t0;
  return constant + lin.dot(d) + 0.5 * d.dot(quad * d) + beta * ts +
         gamma * ts * ts;
}

Eigen::VectorXd TestFunction::horizontal_gradient(
    const CarnotGroup& g, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd gvec = lin + quad * (x - center);
  Eigen::VectorXd out(g.horizontal_dim());
  for (int i = 0; i < g.horizontal_dim(); ++i)
    out[i] = g.vf_coeffs(Frame::Left, i, x).dot(gvec);
  return out;
}

Eigen::MatrixXd TestFunction::horizontal_hessian(
    const CarnotGroup& g, const Eigen::VectorXd& x) const {
  const int m = g.horizontal_dim();
  const Eigen::VectorXd gvec = lin + quad * (x - center);
  std::vector<Eigen::VectorXd> a(m), jg(m);
  for (int i = 0; i < m; ++i) {
    a[i] = g.vf_coeffs(Frame::Left, i, x);
    jg[i] = g.vf_jacobian(Frame::Left, i, x).transpose() * gvec;
  }
  Eigen::MatrixXd r(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      const double dij = a[i].dot(jg[j]) + a[i].dot(quad * a[j]);
      const double dji = a[j].dot(jg[i]) + a[j].dot(quad * a[i]);
      r(i, j) = r(j, i) = 0.5 * (dij + dji);
    }
  return r;
}

std::vector<TestFunction> make_test_family(const CarnotGroup& g,
                                           const Grid& grid,
                                           const std::string& name,
                                           double t_mid) {
  const int n = g.dim();
  const int m = g.horizontal_dim();
  std::vector<TestFunction> family;
  auto euclid_quad = [&](double scale) {
    return (scale * Eigen::MatrixXd::Identity(n, n)).eval();
  };
  if (name == "euclidean_paraboloids") {
    std::vector<Eigen::VectorXd> centers;
    Eigen::VectorXd mid(n), span(n);
    for (int k = 0; k < n; ++k) {
      mid[k] = grid.origin[k] + 0.5 * (grid.counts[k] - 1) * grid.spacing[k];
      span[k] = 0.25 * (grid.counts[k] - 1) * grid.spacing[k];
    }
    centers.push_back(mid);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd c = mid;
      c[k] += span[k];
      centers.push_back(c);
      c[k] = mid[k] - span[k];
      centers.push_back(c);
    }
    for (const auto& z : centers)
      for (double a : {1.5, 6.0})
        for (double beta : {0.0, 1.0, -1.0}) {
          TestFunction tf;
          tf.center = z;
          tf.lin = Eigen::VectorXd::Zero(n);
          tf.quad = euclid_quad(a);
          tf.t0 = t_mid;
          tf.beta = beta;
          tf.gamma = 0.25;
          family.push_back(tf);
        }
    return family;
  }
  if (name == "cylinder_adapted") {
    if (m < 2)
      throw std::invalid_argument("cylinder family needs m >= 2");
    // Members built around the shrinking-cylinder profile |x_H|^2/2 + (m-1)t
    // so both sides have genuine interior touching points. The widened
    // (sub) and narrowed (super) copies keep the quadratic difference
    // definite; the small Euclidean cap makes each touch strict.
    const double a = 0.5, cap = 0.05, gt = 0.25;
    std::vector<Eigen::VectorXd> dirs;
    Eigen::VectorXd d1 = Eigen::VectorXd::Zero(n), d2 = d1, d3 = d1;
    d1[0] = 0.35;
    d1[1] = 0.2;
    d2[0] = -0.3;
    d2[1] = 0.3;
    d3[0] = 0.0;  // touches near the axis: exercises the degenerate branch
    dirs = {d1, d2, d3};
    for (const auto& c : dirs)
      for (double beta : {m - 1.0, m + 1.0}) {
        TestFunction sub;
        sub.center = c;
        sub.lin = Eigen::VectorXd::Zero(n);
        sub.quad = cap * Eigen::MatrixXd::Identity(n, n);
        sub.quad.topLeftCorner(m, m) +=
            (1.0 + a) * Eigen::MatrixXd::Identity(m, m);
        sub.t0 = t_mid;
        sub.beta = beta;
        sub.gamma = gt;
        family.push_back(sub);

        TestFunction super = sub;
        super.quad = -cap * Eigen::MatrixXd::Identity(n, n);
        super.quad.topLeftCorner(m, m) +=
            (1.0 - a) * Eigen::MatrixXd::Identity(m, m);
        super.gamma = -gt;
        family.push_back(super);
      }
    return family;
  }
  throw std::invalid_argument("unknown test family '" + name + "'");
}

std::string ViscosityCheckReport::to_csv() const {
  std::ostringstream os;
  os << "kind,location,t,violation,branch\n";
  for (const auto& rec : flagged)
    os << (side == Side::Sub ? "sub" : "super") << "," << rec.node << ","
       << rec.t << "," << rec.violation << ","
       << (rec.degenerate ? "degenerate" : "main") << "\n";
  return os.str();
}

ViscosityCheckReport viscosity_residual_check(
    const CarnotGroup& g, const Trajectory& traj,
    const std::vector<TestFunction>& family, double tau, Side side,
    double tol) {
  if (family.empty()) throw std::invalid_argument("empty test family");
  if (traj.snapshots.size() < 3)
    throw std::invalid_argument("need at least 3 snapshots");
  const Grid& grid = traj.snapshots.front().grid;
  const std::int64_t nodes = grid.num_nodes();
  const int steps = static_cast<int>(traj.snapshots.size());
  const auto strides = grid.strides();
  const double sign = (side == Side::Sub) ? 1.0 : -1.0;

  ViscosityCheckReport rep;
  rep.side = side;
  rep.tol = tol;

  std::vector<Eigen::ArrayXd> w(static_cast<std::size_t>(steps));
  for (const auto& tf : family) {
    // w = sign * (u - phi); local strict maxima of w are the touch points.
    for (int s = 0; s < steps; ++s) {
      const ScalarField& u = traj.snapshots[static_cast<std::size_t>(s)];
      Eigen::ArrayXd vals(nodes);
      NodeIter it(grid);
      std::int64_t flat = 0;
      do {
        vals[flat] = sign * (u.values[flat] -
                             tf.value(grid.node(it.index()), u.time));
        ++flat;
      } while (it.next());
      w[static_cast<std::size_t>(s)] = std::move(vals);
    }
    for (int s = 1; s + 1 < steps; ++s) {
      const Eigen::ArrayXd& cur = w[static_cast<std::size_t>(s)];
      NodeIter it(grid);
      std::int64_t flat = 0;
      do {
        if (grid.is_interior(it.index(), 1)) {
          const double v0 = cur[flat];
          bool strict = v0 > w[static_cast<std::size_t>(s - 1)][flat] &&
                        v0 > w[static_cast<std::size_t>(s + 1)][flat];
          for (int k = 0; k < grid.dims() && strict; ++k)
            strict = v0 > cur[flat + strides[k]] && v0 > cur[flat - strides[k]];
          if (strict) {
            const double t = traj.snapshots[static_cast<std::size_t>(s)].time;
            const Eigen::VectorXd x = grid.node(it.index());
            const Eigen::VectorXd grad0 = tf.horizontal_gradient(g, x);
            const Eigen::MatrixXd r = tf.horizontal_hessian(g, x);
            const double q = tf.dt(t);
            TouchRecord rec;
            rec.node = flat;
            rec.time_index = s;
            rec.t = t;
            const double gn = grad0.norm();
            if (gn >= tau) {
              double rhs = 0.0;
              for (int i = 0; i < r.rows(); ++i)
                for (int j = 0; j < r.cols(); ++j)
                  rhs += ((i == j ? 1.0 : 0.0) -
                          grad0[i] * grad0[j] / (gn * gn)) *
                         r(i, j);
              rec.violation = sign * (q - rhs);
            } else {
              rec.degenerate = true;
              const double bound = degenerate_branch_bound(r, side);
              rec.violation = sign * (q - bound);
            }
            ++rep.touch_count;
            if (rec.violation > rep.worst_violation) {
              rep.worst_violation = rec.violation;
              rep.worst = rec;
            }
            if (rec.violation > tol) rep.flagged.push_back(rec);
          }
        }
        ++flat;
      } while (it.next());
    }
  }
  rep.pass = rep.touch_count > 0 && rep.worst_violation <= tol;
  return rep;
}

std::vector<double> convergence_to_base(const CarnotGroup& g,
                                        const ScalarField& u,
                                        const std::vector<double>& mus) {
  for (std::size_t i = 1; i < mus.size(); ++i)
    if (!(mus[i] < mus[i - 1]))
      throw std::invalid_argument("mu sequence must decrease");
  std::vector<double> sups;
  sups.reserve(mus.size());
  for (double mu : mus) {
    ConvolvedField c = sup_convolution(g, u, mu);
    sups.push_back((c.values.values - u.values).abs().maxCoeff());
  }
  return sups;
}

}  // namespace cmcf
