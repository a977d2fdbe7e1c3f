#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cmcf {

/// Axis-aligned box of nodes in exponential coordinates. Node (i_1,...,i_n)
/// sits at origin_k + i_k * spacing_k; storage is row major with the last
/// axis fastest.
struct Grid {
  Eigen::VectorXi counts;
  Eigen::VectorXd spacing;
  Eigen::VectorXd origin;

  Grid() = default;
  Grid(Eigen::VectorXi counts_, Eigen::VectorXd spacing_,
       Eigen::VectorXd origin_)
      : counts(std::move(counts_)),
        spacing(std::move(spacing_)),
        origin(std::move(origin_)) {
    validate();
  }

  /// Builds a grid covering [min, max] with spacing h per axis; the upper
  /// edge is rounded to the nearest multiple of h.
  static Grid box(const Eigen::VectorXd& min, const Eigen::VectorXd& max,
                  const Eigen::VectorXd& h) {
    const int n = static_cast<int>(min.size());
    Eigen::VectorXi counts(n);
    for (int k = 0; k < n; ++k) {
      counts[k] = static_cast<int>(std::lround((max[k] - min[k]) / h[k])) + 1;
    }
    return Grid(counts, h, min);
  }

  int dims() const { return static_cast<int>(counts.size()); }

  std::int64_t num_nodes() const {
    std::int64_t total = 1;
    for (int k = 0; k < dims(); ++k) total *= counts[k];
    return total;
  }

  std::vector<std::int64_t> strides() const {
    std::vector<std::int64_t> s(dims());
    std::int64_t acc = 1;
    for (int k = dims() - 1; k >= 0; --k) {
      s[k] = acc;
      acc *= counts[k];
    }
    return s;
  }

  std::int64_t flatten(const Eigen::VectorXi& idx) const {
    std::int64_t flat = 0;
    for (int k = 0; k < dims(); ++k) flat = flat * counts[k] + idx[k];
    return flat;
  }

  Eigen::VectorXi unflatten(std::int64_t flat) const {
    Eigen::VectorXi idx(dims());
    for (int k = dims() - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(flat % counts[k]);
      flat /= counts[k];
    }
    return idx;
  }

  Eigen::VectorXd node(const Eigen::VectorXi& idx) const {
    Eigen::VectorXd x(dims());
    for (int k = 0; k < dims(); ++k) x[k] = origin[k] + idx[k] * spacing[k];
    return x;
  }

  Eigen::VectorXd node(std::int64_t flat) const { return node(unflatten(flat)); }

  /// True when the node is at least `margin` cells away from every face.
  bool is_interior(const Eigen::VectorXi& idx, int margin) const {
    for (int k = 0; k < dims(); ++k)
      if (idx[k] < margin || idx[k] >= counts[k] - margin) return false;
    return true;
  }

  double max_spacing() const { return spacing.maxCoeff(); }
  double min_spacing() const { return spacing.minCoeff(); }

  bool same_layout(const Grid& other) const {
    return counts == other.counts && spacing == other.spacing &&
           origin == other.origin;
  }

  void validate() const {
    if (counts.size() != spacing.size() || counts.size() != origin.size())
      throw std::invalid_argument("grid axis arrays disagree");
    for (int k = 0; k < dims(); ++k) {
      if (counts[k] < 5)
        throw std::invalid_argument("grid needs at least 5 nodes per axis");
      if (!(spacing[k] > 0.0))
        throw std::invalid_argument("grid spacing must be positive");
    }
  }
};

/// Odometer over all nodes; increments the multi-index alongside the flat
/// index so hot loops never divide.
class NodeIter {
 public:
  explicit NodeIter(const Grid& grid)
      : counts_(grid.counts), idx_(Eigen::VectorXi::Zero(grid.dims())) {}

  const Eigen::VectorXi& index() const { return idx_; }

  bool next() {
    for (int k = static_cast<int>(counts_.size()) - 1; k >= 0; --k) {
      if (++idx_[k] < counts_[k]) return true;
      idx_[k] = 0;
    }
    return false;
  }

 private:
  Eigen::VectorXi counts_;
  Eigen::VectorXi idx_;
};

}  // namespace cmcf
