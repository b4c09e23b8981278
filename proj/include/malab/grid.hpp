#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "malab/domain.hpp"

namespace malab {

using Index = int;
using Offset = std::array<int, 3>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

enum class NodeKind : std::uint8_t { Exterior, Interior, BoundaryAdjacent };

/// Uniform Cartesian grid over the bounding box of a convex domain, with every
/// node classified against the domain.
///
/// Nodes sit at center + (i - c) h, so the domain center is always a node. The
/// box carries at least two exterior layers on each side. Linear node index is
/// i + nx (j + ny k): x varies fastest.
class Grid {
 public:
  /// Throws ErrorKind::Configuration when h >= inradius/4 or fewer than eight
  /// interior nodes lie on some axis line through the center.
  static std::shared_ptr<const Grid> build(const ConvexDomain& domain, double h);

  int dim() const { return dim_; }
  double h() const { return h_; }
  double cell_volume() const { return dim_ == 2 ? h_ * h_ : h_ * h_ * h_; }
  const std::array<int, 3>& extents() const { return n_; }
  std::size_t size() const { return kind_.size(); }
  const ConvexDomain& domain() const { return domain_; }
  Point bbox_lo() const { return origin_; }
  Point bbox_hi() const;

  Point position(Index node) const {
    auto c = coords(node);
    return {origin_[0] + c[0] * h_, origin_[1] + c[1] * h_, origin_[2] + c[2] * h_};
  }
  std::array<int, 3> coords(Index node) const {
    return {node % n_[0], (node / n_[0]) % n_[1], node / (n_[0] * n_[1])};
  }
  Index index(const std::array<int, 3>& c) const { return c[0] + n_[0] * (c[1] + n_[1] * c[2]); }
  /// Node at node + offset, or -1 when that falls off the box.
  Index neighbor(Index node, const Offset& o) const {
    auto c = coords(node);
    for (int k = 0; k < 3; ++k) {
      c[k] += o[k];
      if (c[k] < 0 || c[k] >= n_[k]) return -1;
    }
    return index(c);
  }
  Index nearest_node(const Point& x) const;

  NodeKind kind(Index node) const { return kind_[node]; }
  bool inside(Index node) const { return node >= 0 && kind_[node] != NodeKind::Exterior; }
  /// All non-exterior nodes, ascending.
  std::span<const Index> inside_nodes() const { return inside_; }
  /// Position of node within inside_nodes(), or -1 for exterior nodes.
  int inside_rank(Index node) const { return rank_[node]; }

  /// Axis unit offsets followed by the in-plane diagonals e_i + e_j, e_i - e_j.
  std::span<const Offset> axis_offsets() const;
  std::span<const Offset> stencil_offsets() const;

  Grid(const ConvexDomain& domain, double h);

 private:
  int dim_;
  double h_;
  ConvexDomain domain_;
  Point origin_{};
  std::array<int, 3> n_{1, 1, 1};
  std::vector<NodeKind> kind_;
  std::vector<Index> inside_;
  std::vector<int> rank_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Length of an integer offset.
inline double offset_norm(const Offset& o) {
  return std::sqrt(double(o[0] * o[0] + o[1] * o[1] + o[2] * o[2]));
}

/// A set of grid nodes with O(1) membership.
class NodeSet {
 public:
  NodeSet() = default;
  NodeSet(GridPtr grid, std::vector<Index> nodes);
  static NodeSet from_predicate(GridPtr grid, const std::function<bool(Index)>& keep);
  static NodeSet inside(GridPtr grid);

  bool contains(Index node) const { return node >= 0 && !mask_.empty() && mask_[node] != 0; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::span<const Index> nodes() const { return nodes_; }
  auto begin() const { return nodes_.begin(); }
  auto end() const { return nodes_.end(); }
  const GridPtr& grid() const { return grid_; }

  bool subset_of(const NodeSet& other) const;
  NodeSet minus(const NodeSet& other) const;

 private:
  GridPtr grid_;
  std::vector<Index> nodes_;
  std::vector<std::uint8_t> mask_;
};

/// One real value per node. Exterior nodes hold kUndefined unless a caller
/// fills them deliberately (closed-form potentials sample the whole box).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double fill = kUndefined);
  ScalarField(GridPtr grid, std::vector<double> values);

  /// Samples fn at inside nodes, or at every node of the box when all_nodes.
  static ScalarField sample(GridPtr grid, const std::function<double(const Point&)>& fn,
                            bool all_nodes = false);

  double operator[](Index node) const { return values_[node]; }
  double& operator[](Index node) { return values_[node]; }
  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  bool defined(Index node) const { return std::isfinite(values_[node]); }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Symmetric dim x dim matrix per node, stored as the upper triangle
/// (xx, xy, yy) in 2D and (xx, xy, xz, yy, yz, zz) in 3D.
class MatrixField {
 public:
  MatrixField() = default;
  explicit MatrixField(GridPtr grid);

  /// Full 3x3 matrix; in 2D the third row and column are zero.
  Mat3 at(Index node) const;
  void set(Index node, const Mat3& m);
  const Grid& grid() const { return *grid_; }
  std::span<const double> raw() const { return data_; }

 private:
  GridPtr grid_;
  int stride_ = 3;
  std::vector<double> data_;
};

/// One vector per node (only the first dim components are meaningful).
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid) : grid_(std::move(grid)), data_(grid_->size(), Vec3::Zero()) {}

  const Vec3& operator[](Index node) const { return data_[node]; }
  Vec3& operator[](Index node) { return data_[node]; }
  const Grid& grid() const { return *grid_; }

 private:
  GridPtr grid_;
  std::vector<Vec3> data_;
};

}  // namespace malab
