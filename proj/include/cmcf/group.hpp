#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cmcf {

/// A point of the group in exponential coordinates.
using Point = Eigen::VectorXd;

enum class Frame { Left, Right };

struct StructureReport {
  bool passed = true;
  int span_rank = 0;
  int bracket_depth = 0;
  std::vector<std::string> violations;

  std::string summary() const;
};

/// Stratified nilpotent Lie group of step <= 3 in exponential coordinates.
///
/// The group law is the closed-form Baker-Campbell-Hausdorff product
///   x * y = x + y + [x,y]/2 + ([x,[x,y]] + [y,[y,x]])/12,
/// exact for step <= 3. Generator indices are 0-based throughout; the
/// layer of coordinate i is weight(i) in {1,...,step()}.
///
/// Coefficient tables for the left/right invariant frames are built once
/// at construction by differentiating the product, so a single code path
/// serves every preset. Instances are immutable after construction and
/// safe for concurrent use.
class CarnotGroup {
 public:
  CarnotGroup(std::vector<int> layer_dims);

  static CarnotGroup euclidean(int m);
  static CarnotGroup heisenberg(int nu);
  static CarnotGroup engel();

  /// Parses "euclidean:<m>", "heisenberg:<nu>" or "engel".
  static CarnotGroup from_preset(const std::string& name);

  int dim() const { return n_; }
  int horizontal_dim() const { return m_; }
  int step() const { return step_; }
  int weight(int i) const { return weight_[i]; }
  /// 2 * r! -- the homogeneous exponent of the gauge norm.
  int gauge_exponent() const { return gauge_exp_; }

  double c(int i, int j, int k) const { return c_[(i * n_ + j) * n_ + k]; }
  /// Sets c_{ij}^k = v and c_{ji}^k = -v, then refreshes the tables.
  void set_bracket(int i, int j, int k, double v);
  /// Sets a single raw entry without the antisymmetric mirror (for
  /// injecting defects that verify_structure() must catch).
  void set_raw_constant(int i, int j, int k, double v);

  /// Algebra bracket of coordinate vectors: [u,v]_k = sum u_i v_j c_{ij}^k.
  Point bracket(const Point& u, const Point& v) const;

  Point multiply(const Point& x, const Point& y) const;
  Point inverse(const Point& x) const { return -x; }
  Point dilate(double s, const Point& x) const;

  double gauge_power(const Point& x) const;  // |x|^{2 r!}
  double gauge_norm(const Point& x) const;   // homogeneous of degree 1
  double left_distance(const Point& x, const Point& y) const;
  double right_distance(const Point& x, const Point& y) const;

  Eigen::VectorXd horizontal(const Point& x) const { return x.head(m_); }
  Eigen::VectorXd vertical(const Point& x) const { return x.tail(n_ - m_); }

  /// Coefficients a_{ik}(x) of X_i = sum_k a_{ik}(x) d/dx_k (or the right
  /// frame), evaluated exactly from the polynomial tables.
  Eigen::VectorXd vf_coeffs(Frame f, int i, const Point& x) const;
  /// Jacobian of the coefficient polynomials: J(k,l) = d a_{ik} / d x_l.
  Eigen::MatrixXd vf_jacobian(Frame f, int i, const Point& x) const;
  /// n x n matrix whose row i holds the coefficients of X_i^eps; rows of
  /// weight > 1 are scaled by eps.
  Eigen::MatrixXd frame_matrix(Frame f, const Point& x, double eps) const;

  StructureReport verify_structure() const;

  /// Empirical quasi-triangle constant sup |x*y| / (|x| + |y|) over random
  /// samples in a gauge ball. The exact constant is group-dependent and
  /// has no closed form; we only report it.
  double empirical_quasi_triangle_constant(int samples, unsigned seed) const;

 private:
  void rebuild_tables();

  int step_ = 1;
  int n_ = 0;
  int m_ = 0;
  int gauge_exp_ = 2;
  std::vector<int> layer_dims_;
  std::vector<int> weight_;
  std::vector<double> c_;  // dense n^3, c_[(i*n+j)*n+k]

  struct CoeffTable {
    // a_i(x) = e_i + lin * x + (x^T quad[k] x)_k with quad[k] symmetric.
    Eigen::MatrixXd lin;
    std::vector<Eigen::MatrixXd> quad;
  };
  std::vector<CoeffTable> left_;
  std::vector<CoeffTable> right_;
};

}  // namespace cmcf
