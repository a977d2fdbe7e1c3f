#include "cmcf/flow.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "cmcf/parallel.hpp"

namespace cmcf {

void FlowParams::validate() const {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  if (mode == FlowMode::LevelSet && !(delta > 0.0))
    throw std::invalid_argument("delta must be > 0");
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (!(cfl > 0.0) || cfl > 0.5)
    throw std::invalid_argument("cfl factor must lie in (0, 0.5]");
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  if (snapshot_every < 1)
    throw std::invalid_argument("snapshot_every must be >= 1");
}

const ScalarField& Trajectory::at_time(double t) const {
  if (snapshots.empty()) throw std::runtime_error("empty trajectory");
  std::size_t best = 0;
  double gap = std::abs(snapshots[0].time - t);
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    double d = std::abs(snapshots[i].time - t);
    if (d < gap) {
      gap = d;
      best = i;
    }
  }
  return snapshots[best];
}

bool CauchyReport::decreasing() const {
  for (std::size_t i = 1; i < sup_differences.size(); ++i)
    if (!(sup_differences[i] < sup_differences[i - 1])) return false;
  return true;
}

namespace {

// Per-node frozen data for one run: the active frame rows E (krows x n,
// eps-scaled, vertical rows dropped when they vanish), the symmetric
// P0 = (1+sigma) E^T E, and the right-frame horizontal rows for the
// Lipschitz metric.
struct Workspace {
  int n = 0;
  int m = 0;
  int krows = 0;
  std::int64_t nodes = 0;
  double s0 = 0.0;  // delta (level set) or 1 (graph)
  double dt = 0.0;
  double tau = 0.0;
  double dt_stable = 0.0;  // von Neumann bound for the frozen symbol
  std::vector<double> frame;  // nodes * krows * n
  std::vector<double> p0;     // nodes * n*(n+1)/2, upper triangle
  std::vector<double> right;  // nodes * m * n
  std::vector<std::int64_t> strides;

  Workspace(const CarnotGroup& g, const Grid& grid, const FlowParams& p) {
    n = g.dim();
    m = g.horizontal_dim();
    nodes = grid.num_nodes();
    tau = p.tau_or_default(grid);
    const bool graph = p.mode == FlowMode::Graph;
    krows = graph ? m : (p.eps > 0.0 ? n : m);
    s0 = graph ? 1.0 : p.delta;
    strides = grid.strides();
    frame.resize(static_cast<std::size_t>(nodes) * krows * n);
    p0.resize(static_cast<std::size_t>(nodes) * n * (n + 1) / 2);
    right.resize(static_cast<std::size_t>(nodes) * m * n);
    const double sig = graph ? 0.0 : p.sigma;
    double inv_h2 = 0.0;
    for (int k = 0; k < n; ++k)
      inv_h2 += 1.0 / (grid.spacing[k] * grid.spacing[k]);
    double worst_symbol = 0.0;
    NodeIter it(grid);
    std::int64_t flat = 0;
    do {
      const Eigen::VectorXd x = grid.node(it.index());
      Eigen::MatrixXd e(krows, n);
      for (int i = 0; i < krows; ++i) {
        Eigen::VectorXd a = g.vf_coeffs(Frame::Left, i, x);
        if (g.weight(i) > 1) a *= p.eps;
        e.row(i) = a.transpose();
      }
      Eigen::MatrixXd pp = (1.0 + sig) * (e.transpose() * e);
      double* fdst = &frame[static_cast<std::size_t>(flat) * krows * n];
      for (int i = 0; i < krows; ++i)
        for (int k = 0; k < n; ++k) fdst[i * n + k] = e(i, k);
      double* pdst = &p0[static_cast<std::size_t>(flat) * n * (n + 1) / 2];
      int slot = 0;
      for (int l = 0; l < n; ++l)
        for (int k = l; k < n; ++k) pdst[slot++] = pp(l, k);
      double* rdst = &right[static_cast<std::size_t>(flat) * m * n];
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd a = g.vf_coeffs(Frame::Right, i, x);
        for (int k = 0; k < n; ++k) rdst[i * n + k] = a[k];
      }
      // Frozen-coefficient symbol bound: the step matrix M is PSD with
      // M <= P0, and the central scheme's symbol magnitude never exceeds
      // sum_l 4 P0_ll / h_l^2 + tr(P0) * sum_l 1/h_l^2.
      double bound = tr_bound(pp, grid) + pp.trace() * inv_h2;
      worst_symbol = std::max(worst_symbol, bound);
      ++flat;
    } while (it.next());
    dt_stable = 2.0 / worst_symbol;
  }

  static double tr_bound(const Eigen::MatrixXd& pp, const Grid& grid) {
    double b = 0.0;
    for (int l = 0; l < pp.rows(); ++l)
      b += 4.0 * pp(l, l) / (grid.spacing[l] * grid.spacing[l]);
    return b;
  }
};

struct ChunkStats {
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
  std::int64_t masked = 0;
  bool bad = false;
};

// One explicit step; also fills per-chunk stats of the NEW field. The
// stats vector must hold ceil(nodes / kParallelChunk) entries.
void kernel(const Workspace& ws, const Grid& grid, const ScalarField& u,
            ScalarField& out, std::vector<ChunkStats>& stats) {
  const int n = ws.n;
  const int krows = ws.krows;
  const double far = u.far_field;
  const double* uv = u.values.data();
  double* ov = out.values.data();
  const double tau2 = ws.tau * ws.tau;

  parallel_for(ws.nodes, [&](std::int64_t begin, std::int64_t end) {
    ChunkStats st;
    Eigen::VectorXi idx = grid.unflatten(begin);
    double up[4], um[4], du[4], xi[4], q[4];
    for (std::int64_t flat = begin; flat < end; ++flat) {
      bool interior = true;
      for (int k = 0; k < n; ++k)
        if (idx[k] < 1 || idx[k] >= grid.counts[k] - 1) {
          interior = false;
          break;
        }
      const double u0 = uv[flat];
      auto read = [&](int axis, int d1, int axis2, int d2) -> double {
        std::int64_t f = flat;
        int j1 = idx[axis] + d1;
        if (j1 < 0 || j1 >= grid.counts[axis]) return far;
        f += d1 * ws.strides[axis];
        if (axis2 >= 0) {
          int j2 = idx[axis2] + d2;
          if (j2 < 0 || j2 >= grid.counts[axis2]) return far;
          f += d2 * ws.strides[axis2];
        }
        return uv[f];
      };
      for (int k = 0; k < n; ++k) {
        if (interior) {
          up[k] = uv[flat + ws.strides[k]];
          um[k] = uv[flat - ws.strides[k]];
        } else {
          up[k] = read(k, +1, -1, 0);
          um[k] = read(k, -1, -1, 0);
        }
        du[k] = (up[k] - um[k]) / (2.0 * grid.spacing[k]);
      }
      const double* e = &ws.frame[static_cast<std::size_t>(flat) * krows * n];
      double s = ws.s0;
      for (int r = 0; r < krows; ++r) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += e[r * n + k] * du[k];
        xi[r] = acc;
        s += acc * acc;
      }
      double hxi2 = 0.0;
      for (int r = 0; r < ws.m; ++r) hxi2 += xi[r] * xi[r];
      if (hxi2 < tau2) ++st.masked;
      for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int r = 0; r < krows; ++r) acc += e[r * n + k] * xi[r];
        q[k] = acc;
      }
      const double* pp = &ws.p0[static_cast<std::size_t>(flat) * n * (n + 1) / 2];
      double rhs = 0.0;
      int slot = 0;
      for (int l = 0; l < n; ++l) {
        const double hl = grid.spacing[l];
        {
          const double mll = pp[slot++] - q[l] * q[l] / s;
          rhs += mll * (up[l] + um[l] - 2.0 * u0) / (hl * hl);
        }
        for (int k = l + 1; k < n; ++k) {
          const double mlk = pp[slot++] - q[l] * q[k] / s;
          if (mlk == 0.0) continue;
          // Plain 4-point cross difference: with M PSD the combined
          // frozen-coefficient symbol stays nonpositive, which is what
          // keeps the explicit step dissipative.
          const double cpp = interior ? uv[flat + ws.strides[l] + ws.strides[k]]
                                      : read(l, +1, k, +1);
          const double cmm = interior ? uv[flat - ws.strides[l] - ws.strides[k]]
                                      : read(l, -1, k, -1);
          const double cpm = interior ? uv[flat + ws.strides[l] - ws.strides[k]]
                                      : read(l, +1, k, -1);
          const double cmp = interior ? uv[flat - ws.strides[l] + ws.strides[k]]
                                      : read(l, -1, k, +1);
          rhs += 2.0 * mlk * (cpp + cmm - cpm - cmp) /
                 (4.0 * hl * grid.spacing[k]);
        }
      }
      const double next = u0 + ws.dt * rhs;
      ov[flat] = next;
      if (!std::isfinite(next)) st.bad = true;
      if (next > st.sup) st.sup = next;
      if (next < st.inf) st.inf = next;
      // odometer
      for (int k = n - 1; k >= 0; --k) {
        if (++idx[k] < grid.counts[k]) break;
        idx[k] = 0;
      }
    }
    stats[static_cast<std::size_t>(begin / kParallelChunk)] = st;
  });
}

ChunkStats combine(const std::vector<ChunkStats>& stats) {
  ChunkStats total;
  for (const auto& st : stats) {
    total.sup = std::max(total.sup, st.sup);
    total.inf = std::min(total.inf, st.inf);
    total.masked += st.masked;
    total.bad = total.bad || st.bad;
  }
  return total;
}

std::size_t num_chunks(std::int64_t nodes) {
  return static_cast<std::size_t>((nodes + kParallelChunk - 1) /
                                  kParallelChunk);
}

ScalarField step_impl(const CarnotGroup& g, const ScalarField& u,
                      const FlowParams& params, double dt) {
  params.validate();
  Workspace ws(g, u.grid, params);
  ws.dt = dt > 0.0 ? dt
                   : std::min(cfl_dt(u.grid, g, params, u), ws.dt_stable);
  ScalarField out(u.grid, u.far_field, u.time + ws.dt);
  std::vector<ChunkStats> stats(num_chunks(ws.nodes));
  kernel(ws, u.grid, u, out, stats);
  if (combine(stats).bad)
    throw std::runtime_error("NaN detected in flow step");
  return out;
}

// Sup of the right-frame horizontal gradient magnitude over nodes whose
// stencil stays inside the box: boundary quotients against the ghost
// constant are artifacts, not Lipschitz data.
double lip_metric(const Workspace& ws, const Grid& grid,
                  const ScalarField& u) {
  const int n = ws.n;
  const int m = ws.m;
  const double* uv = u.values.data();
  std::vector<double> partial(num_chunks(ws.nodes), 0.0);
  parallel_for(ws.nodes, [&](std::int64_t begin, std::int64_t end) {
    double best = 0.0;
    Eigen::VectorXi idx = grid.unflatten(begin);
    double du[4];
    for (std::int64_t flat = begin; flat < end; ++flat) {
      bool interior = true;
      for (int k = 0; k < n; ++k)
        if (idx[k] < 1 || idx[k] >= grid.counts[k] - 1) {
          interior = false;
          break;
        }
      if (interior) {
        for (int k = 0; k < n; ++k)
          du[k] = (uv[flat + ws.strides[k]] - uv[flat - ws.strides[k]]) /
                  (2.0 * grid.spacing[k]);
        const double* r = &ws.right[static_cast<std::size_t>(flat) * m * n];
        double mag2 = 0.0;
        for (int i = 0; i < m; ++i) {
          double acc = 0.0;
          for (int k = 0; k < n; ++k) acc += r[i * n + k] * du[k];
          mag2 += acc * acc;
        }
        if (mag2 > best) best = mag2;
      }
      for (int k = n - 1; k >= 0; --k) {
        if (++idx[k] < grid.counts[k]) break;
        idx[k] = 0;
      }
    }
    partial[static_cast<std::size_t>(begin / kParallelChunk)] = best;
  });
  double best = 0.0;
  for (double b : partial) best = std::max(best, b);
  return std::sqrt(best);
}

}  // namespace

double cfl_dt(const Grid& grid, const CarnotGroup& g, const FlowParams& params,
              const ScalarField& field) {
  params.validate();
  if (grid.num_nodes() <= 0) throw std::invalid_argument("empty grid");
  if (!field.values.allFinite())
    throw std::invalid_argument("field must be finite");
  double biggest = 0.0;
  NodeIter it(grid);
  do {
    const Eigen::VectorXd x = grid.node(it.index());
    for (int i = 0; i < g.dim(); ++i) {
      Eigen::VectorXd a = g.vf_coeffs(Frame::Left, i, x);
      const double scale = (g.weight(i) > 1) ? params.eps : 1.0;
      biggest = std::max(biggest, scale * a.cwiseAbs().maxCoeff());
    }
  } while (it.next());
  const double h = grid.min_spacing();
  return params.cfl * h * h / (g.dim() * biggest * biggest);
}

ScalarField step_level_set(const CarnotGroup& g, const ScalarField& u,
                           const FlowParams& params, double dt) {
  FlowParams p = params;
  p.mode = FlowMode::LevelSet;
  return step_impl(g, u, p, dt);
}

ScalarField step_graph_flow(const CarnotGroup& g, const ScalarField& u,
                            const FlowParams& params, double dt) {
  FlowParams p = params;
  p.mode = FlowMode::Graph;
  return step_impl(g, u, p, dt);
}

Trajectory run_flow(const CarnotGroup& g, const ScalarField& initial,
                    const FlowParams& params) {
  params.validate();
  Workspace ws(g, initial.grid, params);
  // The stated step size, clamped to the frozen-coefficient von Neumann
  // bound (on wide boxes the coefficient growth can make the nominal CFL
  // step admit growing modes).
  ws.dt = std::min(cfl_dt(initial.grid, g, params, initial), ws.dt_stable);
  const std::int64_t steps =
      static_cast<std::int64_t>(std::ceil(params.t_end / ws.dt - 1e-12));

  Trajectory traj;
  ScalarField u = initial;

  StepMetrics m0;
  m0.step = 0;
  m0.t = u.time;
  m0.dt = ws.dt;
  m0.sup = u.sup();
  m0.inf = u.inf();
  m0.lip_right = lip_metric(ws, u.grid, u);
  {
    VectorField hg = horizontal_gradient(g, u);
    ScalarField mag = magnitude(hg);
    std::int64_t masked = 0;
    for (std::int64_t i = 0; i < ws.nodes; ++i)
      masked += (mag.values[i] < ws.tau);
    m0.mask_fraction = static_cast<double>(masked) / ws.nodes;
  }
  traj.metrics.push_back(m0);
  traj.snapshots.push_back(u);

  ScalarField out(u.grid, u.far_field, 0.0);
  std::vector<ChunkStats> stats(num_chunks(ws.nodes));
  for (std::int64_t s = 1; s <= steps; ++s) {
    out.time = u.time + ws.dt;
    kernel(ws, u.grid, u, out, stats);
    const ChunkStats total = combine(stats);
    if (total.bad) {
      std::ostringstream os;
      os << "NaN detected at step " << s;
      throw std::runtime_error(os.str());
    }
    std::swap(u, out);
    StepMetrics sm;
    sm.step = s;
    sm.t = u.time;
    sm.dt = ws.dt;
    sm.sup = total.sup;
    sm.inf = total.inf;
    sm.lip_right = lip_metric(ws, u.grid, u);
    sm.mask_fraction = static_cast<double>(total.masked) / ws.nodes;
    traj.metrics.push_back(sm);
    if (s % params.snapshot_every == 0 || s == steps)
      traj.snapshots.push_back(u);
  }
  return traj;
}

std::pair<std::vector<Trajectory>, CauchyReport> vanishing_viscosity_run(
    const CarnotGroup& g, const ScalarField& initial,
    const std::vector<std::pair<double, double>>& schedule,
    const FlowParams& base) {
  if (schedule.empty()) throw std::invalid_argument("empty schedule");
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    const double prev = schedule[k - 1].second / schedule[k - 1].first;
    const double cur = schedule[k].second / schedule[k].first;
    if (!(cur < prev))
      throw std::invalid_argument(
          "schedule must have strictly decreasing eps_k/delta_k");
  }
  std::vector<Trajectory> runs;
  runs.reserve(schedule.size());
  for (const auto& [delta, eps] : schedule) {
    FlowParams p = base;
    p.delta = delta;
    p.eps = eps;
    runs.push_back(run_flow(g, initial, p));
  }
  CauchyReport report;
  const Grid& grid = initial.grid;
  for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
    double worst = 0.0;
    for (const auto& snap : runs[k].snapshots) {
      const ScalarField& other = runs[k + 1].at_time(snap.time);
      NodeIter it(grid);
      std::int64_t flat = 0;
      do {
        if (grid.is_interior(it.index(), 2)) {
          worst = std::max(worst,
                           std::abs(snap.values[flat] - other.values[flat]));
        }
        ++flat;
      } while (it.next());
    }
    report.sup_differences.push_back(worst);
  }
  return {std::move(runs), report};
}

ComparisonReport comparison_check(const CarnotGroup& g, const ScalarField& f,
                                  const ScalarField& g_data,
                                  const FlowParams& params) {
  if (!f.grid.same_layout(g_data.grid))
    throw std::invalid_argument("comparison_check requires matching grids");
  Trajectory tf = run_flow(g, f, params);
  Trajectory tg = run_flow(g, g_data, params);
  ComparisonReport rep;
  for (std::size_t s = 0; s < tf.snapshots.size(); ++s) {
    const auto& uf = tf.snapshots[s];
    const auto& ug = tg.snapshots[s];
    for (std::int64_t i = 0; i < uf.values.size(); ++i) {
      const double v = uf.values[i] - ug.values[i];
      if (v > rep.max_violation) {
        rep.max_violation = v;
        rep.at_time = uf.time;
        rep.at_node = i;
      }
    }
  }
  return rep;
}

double lipschitz_seminorm(const CarnotGroup& g, const ScalarField& u) {
  FlowParams p;
  p.t_end = 1.0;  // unused; workspace only needs the frame tables
  Workspace ws(g, u.grid, p);
  return lip_metric(ws, u.grid, u);
}

}  // namespace cmcf
