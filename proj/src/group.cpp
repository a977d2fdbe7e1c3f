#include "cmcf/group.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cmcf {
namespace {

int factorial(int r) {
  int f = 1;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

}  // namespace

std::string StructureReport::summary() const {
  std::ostringstream os;
  os << (passed ? "pass" : "fail") << ", span rank " << span_rank
     << ", bracket depth " << bracket_depth;
  for (const auto& v : violations) os << "\n  " << v;
  return os.str();
}

CarnotGroup::CarnotGroup(std::vector<int> layer_dims)
    : layer_dims_(std::move(layer_dims)) {
  step_ = static_cast<int>(layer_dims_.size());
  if (step_ < 1 || step_ > 3)
    throw std::invalid_argument("step must be between 1 and 3");
  for (int d : layer_dims_)
    if (d < 1) throw std::invalid_argument("layer dimensions must be positive");
  m_ = layer_dims_[0];
  n_ = 0;
  for (int k = 0; k < step_; ++k) {
    for (int i = 0; i < layer_dims_[k]; ++i) weight_.push_back(k + 1);
    n_ += layer_dims_[k];
  }
  gauge_exp_ = 2 * factorial(step_);
  c_.assign(static_cast<std::size_t>(n_) * n_ * n_, 0.0);
  rebuild_tables();
}

CarnotGroup CarnotGroup::euclidean(int m) {
  if (m < 1) throw std::invalid_argument("euclidean dimension must be >= 1");
  return CarnotGroup({m});
}

CarnotGroup CarnotGroup::heisenberg(int nu) {
  if (nu < 1) throw std::invalid_argument("heisenberg index must be >= 1");
  CarnotGroup g({2 * nu, 1});
  // [X_i, X_{nu+i}] = X_{2 nu}
  for (int i = 0; i < nu; ++i) g.set_bracket(i, nu + i, 2 * nu, 1.0);
  return g;
}

CarnotGroup CarnotGroup::engel() {
  CarnotGroup g({2, 1, 1});
  g.set_bracket(0, 1, 2, 1.0);  // [X_1, X_2] = X_3
  g.set_bracket(0, 2, 3, 1.0);  // [X_1, X_3] = X_4
  return g;
}

CarnotGroup CarnotGroup::from_preset(const std::string& name) {
  auto colon = name.find(':');
  std::string head = name.substr(0, colon);
  if (head == "engel") {
    if (colon != std::string::npos)
      throw std::invalid_argument("engel takes no parameter");
    return engel();
  }
  if (colon == std::string::npos)
    throw std::invalid_argument("preset '" + name +
                                "' needs a parameter, e.g. heisenberg:1");
  int arg = 0;
  try {
    std::size_t used = 0;
    arg = std::stoi(name.substr(colon + 1), &used);
    if (colon + 1 + used != name.size()) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad preset parameter in '" + name + "'");
  }
  if (head == "euclidean") return euclidean(arg);
  if (head == "heisenberg") return heisenberg(arg);
  throw std::invalid_argument("unknown preset '" + name + "'");
}

void CarnotGroup::set_bracket(int i, int j, int k, double v) {
  c_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k] = v;
  c_[(static_cast<std::size_t>(j) * n_ + i) * n_ + k] = -v;
  rebuild_tables();
}

void CarnotGroup::set_raw_constant(int i, int j, int k, double v) {
  c_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k] = v;
  rebuild_tables();
}

Point CarnotGroup::bracket(const Point& u, const Point& v) const {
  Point out = Point::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    if (u[i] == 0.0) continue;
    for (int j = 0; j < n_; ++j) {
      if (v[j] == 0.0) continue;
      const double uv = u[i] * v[j];
      const double* row = &c_[(static_cast<std::size_t>(i) * n_ + j) * n_];
      for (int k = 0; k < n_; ++k) out[k] += uv * row[k];
    }
  }
  return out;
}

Point CarnotGroup::multiply(const Point& x, const Point& y) const {
  if (x.size() != n_ || y.size() != n_)
    throw std::invalid_argument("point dimension mismatch");
  Point out = x + y;
  if (step_ >= 2) {
    Point b = bracket(x, y);
    out += 0.5 * b;
    if (step_ >= 3) out += (bracket(x, b) - bracket(y, b)) / 12.0;
  }
  return out;
}

Point CarnotGroup::dilate(double s, const Point& x) const {
  if (!(s > 0.0)) throw std::invalid_argument("dilation factor must be > 0");
  Point out(n_);
  for (int i = 0; i < n_; ++i) out[i] = std::pow(s, weight_[i]) * x[i];
  return out;
}

double CarnotGroup::gauge_power(const Point& x) const {
  double sum = 0.0;
  for (int i = 0; i < n_; ++i)
    sum += std::pow(std::abs(x[i]),
                    static_cast<double>(gauge_exp_) / weight_[i]);
  return sum;
}

double CarnotGroup::gauge_norm(const Point& x) const {
  // Normalise by the homogeneous magnitude so the large exponents
  // (up to 12 for step 3) never overflow.
  double mag = 0.0;
  for (int i = 0; i < n_; ++i)
    mag = std::max(mag, std::pow(std::abs(x[i]), 1.0 / weight_[i]));
  if (mag == 0.0) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < n_; ++i) {
    double t = std::abs(x[i]) / std::pow(mag, weight_[i]);
    sum += std::pow(t, static_cast<double>(gauge_exp_) / weight_[i]);
  }
  return mag * std::pow(sum, 1.0 / gauge_exp_);
}

double CarnotGroup::left_distance(const Point& x, const Point& y) const {
  return gauge_norm(multiply(inverse(y), x));
}

double CarnotGroup::right_distance(const Point& x, const Point& y) const {
  return gauge_norm(multiply(x, inverse(y)));
}

void CarnotGroup::rebuild_tables() {
  auto build = [&](double lin_sign) {
    std::vector<CoeffTable> tables(n_);
    for (int i = 0; i < n_; ++i) {
      CoeffTable t;
      t.lin = Eigen::MatrixXd::Zero(n_, n_);
      // d/ds (x * s e_i) at s=0 = e_i + [x, e_i]/2 + [x, [x, e_i]]/12.
      // The right frame flips the sign of the linear (single-bracket) term.
      for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j) t.lin(k, j) = lin_sign * 0.5 * c(j, i, k);
      if (step_ >= 3) {
        t.quad.assign(n_, Eigen::MatrixXd::Zero(n_, n_));
        for (int k = 0; k < n_; ++k) {
          for (int j = 0; j < n_; ++j)
            for (int l = 0; l < n_; ++l) {
              double v = 0.0;
              for (int q = 0; q < n_; ++q) v += c(l, i, q) * c(j, q, k);
              t.quad[k](j, l) += v / 12.0;
            }
          t.quad[k] = 0.5 * (t.quad[k] + t.quad[k].transpose()).eval();
        }
      }
      tables[i] = std::move(t);
    }
    return tables;
  };
  left_ = build(+1.0);
  right_ = build(-1.0);
}

Eigen::VectorXd CarnotGroup::vf_coeffs(Frame f, int i, const Point& x) const {
  if (i < 0 || i >= n_) throw std::out_of_range("generator index out of range");
  const CoeffTable& t = (f == Frame::Left) ? left_[i] : right_[i];
  Eigen::VectorXd a = t.lin * x;
  a[i] += 1.0;
  if (!t.quad.empty())
    for (int k = 0; k < n_; ++k) a[k] += x.dot(t.quad[k] * x);
  return a;
}

Eigen::MatrixXd CarnotGroup::vf_jacobian(Frame f, int i, const Point& x) const {
  if (i < 0 || i >= n_) throw std::out_of_range("generator index out of range");
  const CoeffTable& t = (f == Frame::Left) ? left_[i] : right_[i];
  Eigen::MatrixXd jac = t.lin;
  if (!t.quad.empty())
    for (int k = 0; k < n_; ++k) jac.row(k) += 2.0 * (t.quad[k] * x).transpose();
  return jac;
}

Eigen::MatrixXd CarnotGroup::frame_matrix(Frame f, const Point& x,
                                          double eps) const {
  Eigen::MatrixXd mat(n_, n_);
  for (int i = 0; i < n_; ++i) {
    Eigen::VectorXd a = vf_coeffs(f, i, x);
    if (weight_[i] > 1) a *= eps;
    mat.row(i) = a.transpose();
  }
  return mat;
}

StructureReport CarnotGroup::verify_structure() const {
  StructureReport rep;
  auto fail = [&](const std::string& msg) {
    rep.passed = false;
    rep.violations.push_back(msg);
  };

  for (int i = 0; i < n_ && rep.passed; ++i)
    for (int j = 0; j < n_ && rep.passed; ++j)
      for (int k = 0; k < n_ && rep.passed; ++k) {
        if (c(i, j, k) != -c(j, i, k)) {
          std::ostringstream os;
          os << "anti-symmetry: c(" << i << "," << j << "," << k << ") = "
             << c(i, j, k) << " but c(" << j << "," << i << "," << k << ") = "
             << c(j, i, k);
          fail(os.str());
        }
        if (c(i, j, k) != 0.0 && weight_[k] != weight_[i] + weight_[j]) {
          std::ostringstream os;
          os << "grading: c(" << i << "," << j << "," << k
             << ") nonzero but d(k) != d(i)+d(j)";
          fail(os.str());
        }
      }

  // Jacobi identity on the structure constants.
  for (int i = 0; i < n_ && rep.passed; ++i)
    for (int j = 0; j < n_ && rep.passed; ++j)
      for (int k = 0; k < n_ && rep.passed; ++k)
        for (int l = 0; l < n_ && rep.passed; ++l) {
          double s = 0.0;
          for (int q = 0; q < n_; ++q)
            s += c(j, k, q) * c(i, q, l) + c(k, i, q) * c(j, q, l) +
                 c(i, j, q) * c(k, q, l);
          if (std::abs(s) > 1e-12) {
            std::ostringstream os;
            os << "Jacobi identity fails at (" << i << "," << j << "," << k
               << ") -> " << l;
            fail(os.str());
          }
        }

  // Hoermander rank: iterated brackets of horizontal generators must span.
  if (rep.passed) {
    std::vector<Point> gens;
    for (int i = 0; i < m_; ++i) {
      Point e = Point::Zero(n_);
      e[i] = 1.0;
      gens.push_back(e);
    }
    std::vector<Point> span = gens;
    std::vector<Point> layer = gens;
    int depth = 1;
    auto rank_of = [&](const std::vector<Point>& vs) {
      Eigen::MatrixXd mat(n_, static_cast<int>(vs.size()));
      for (std::size_t c0 = 0; c0 < vs.size(); ++c0)
        mat.col(static_cast<int>(c0)) = vs[c0];
      return Eigen::FullPivLU<Eigen::MatrixXd>(mat).rank();
    };
    int rank = static_cast<int>(rank_of(span));
    while (rank < n_ && depth < step_) {
      std::vector<Point> next;
      for (const auto& g : gens)
        for (const auto& v : layer) next.push_back(bracket(g, v));
      for (const auto& v : next) span.push_back(v);
      layer = std::move(next);
      ++depth;
      rank = static_cast<int>(rank_of(span));
    }
    rep.span_rank = rank;
    rep.bracket_depth = depth;
    if (rank < n_) fail("horizontal generators and brackets do not span");
  }

  // Bracket of the realised coefficient fields recovers the table, and
  // left and right fields commute. Checked exactly at sample points.
  if (rep.passed) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    for (int trial = 0; trial < 5 && rep.passed; ++trial) {
      Point x(n_);
      for (int i = 0; i < n_; ++i) x[i] = uni(rng);
      std::vector<Eigen::VectorXd> a(n_), at(n_);
      std::vector<Eigen::MatrixXd> ja(n_), jat(n_);
      for (int i = 0; i < n_; ++i) {
        a[i] = vf_coeffs(Frame::Left, i, x);
        at[i] = vf_coeffs(Frame::Right, i, x);
        ja[i] = vf_jacobian(Frame::Left, i, x);
        jat[i] = vf_jacobian(Frame::Right, i, x);
      }
      for (int i = 0; i < n_ && rep.passed; ++i)
        for (int j = 0; j < n_ && rep.passed; ++j) {
          Eigen::VectorXd comm = ja[j] * a[i] - ja[i] * a[j];
          Eigen::VectorXd expect = Eigen::VectorXd::Zero(n_);
          for (int k = 0; k < n_; ++k) {
            double cij = c(i, j, k);
            if (cij != 0.0) expect += cij * a[k];
          }
          if ((comm - expect).lpNorm<Eigen::Infinity>() > 1e-10) {
            std::ostringstream os;
            os << "coefficient fields: [X_" << i << ", X_" << j
               << "] does not match the structure constants";
            fail(os.str());
          }
          Eigen::VectorXd mixed = jat[j] * a[i] - ja[i] * at[j];
          if (mixed.lpNorm<Eigen::Infinity>() > 1e-10) {
            std::ostringstream os;
            os << "left field X_" << i << " and right field X~_" << j
               << " do not commute";
            fail(os.str());
          }
        }
    }
  }
  return rep;
}

double CarnotGroup::empirical_quasi_triangle_constant(int samples,
                                                      unsigned seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Point x(n_), y(n_);
    for (int i = 0; i < n_; ++i) {
      x[i] = uni(rng);
      y[i] = uni(rng);
    }
    double denom = gauge_norm(x) + gauge_norm(y);
    if (denom < 1e-12) continue;
    worst = std::max(worst, gauge_norm(multiply(x, y)) / denom);
  }
  return worst;
}

}  // namespace cmcf
