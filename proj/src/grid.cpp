#include "malab/grid.hpp"

#include <algorithm>
#include <string>

#include "malab/error.hpp"

namespace malab {

namespace {

const std::vector<Offset> kAxes2 = {{1, 0, 0}, {0, 1, 0}};
const std::vector<Offset> kAxes3 = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
const std::vector<Offset> kStencil2 = {{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, -1, 0}};
const std::vector<Offset> kStencil3 = {{1, 0, 0},  {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 0},
                                       {1, 0, 1},  {1, 0, -1}, {0, 1, 1}, {0, 1, -1}};

}  // namespace

Grid::Grid(const ConvexDomain& domain, double h) : dim_(domain.dim()), h_(h), domain_(domain) {
  require(h > 0.0 && std::isfinite(h), ErrorKind::Configuration, "grid spacing must be positive");
  Point half = domain.half_extent();
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < dim_; ++k) {
    c[k] = static_cast<int>(std::ceil(half[k] / h - 1e-12)) + 2;
    n_[k] = 2 * c[k] + 1;
    origin_[k] = domain.center()[k] - c[k] * h;
  }
  std::size_t total = std::size_t(n_[0]) * n_[1] * n_[2];
  require(total < std::size_t(1) << 31, ErrorKind::Configuration, "grid too large");
  kind_.assign(total, NodeKind::Exterior);
  for (Index i = 0; i < static_cast<Index>(total); ++i)
    if (domain_.contains(position(i))) kind_[i] = NodeKind::Interior;
  rank_.assign(total, -1);
  for (Index i = 0; i < static_cast<Index>(total); ++i) {
    if (kind_[i] == NodeKind::Exterior) continue;
    for (int k = 0; k < dim_; ++k) {
      for (int s : {-1, 1}) {
        Offset o{0, 0, 0};
        o[k] = s;
        Index q = neighbor(i, o);
        if (q < 0 || kind_[q] == NodeKind::Exterior) kind_[i] = NodeKind::BoundaryAdjacent;
      }
    }
    rank_[i] = static_cast<int>(inside_.size());
    inside_.push_back(i);
  }
}

std::shared_ptr<const Grid> Grid::build(const ConvexDomain& domain, double h) {
  double inr = domain.inradius();
  if (!(h < inr / 4.0))
    fail(ErrorKind::Configuration, "grid spacing h=" + std::to_string(h) +
                                       " too coarse for domain " + domain.spec() +
                                       " (needs h < inradius/4 = " + std::to_string(inr / 4.0) + ")");
  auto grid = std::make_shared<const Grid>(domain, h);
  Index center = grid->nearest_node(domain.center());
  for (int k = 0; k < grid->dim(); ++k) {
    int count = 0;
    auto c = grid->coords(center);
    for (int i = 0; i < grid->extents()[k]; ++i) {
      c[k] = i;
      if (grid->inside(grid->index(c))) ++count;
    }
    require(count >= 8, ErrorKind::Configuration,
            "grid too coarse: fewer than 8 interior nodes along axis " + std::to_string(k));
  }
  return grid;
}

Point Grid::bbox_hi() const {
  Point p = origin_;
  for (int k = 0; k < dim_; ++k) p[k] += (n_[k] - 1) * h_;
  return p;
}

Index Grid::nearest_node(const Point& x) const {
  std::array<int, 3> c{0, 0, 0};
  for (int k = 0; k < dim_; ++k)
    c[k] = std::clamp(static_cast<int>(std::lround((x[k] - origin_[k]) / h_)), 0, n_[k] - 1);
  return index(c);
}

std::span<const Offset> Grid::axis_offsets() const { return dim_ == 2 ? kAxes2 : kAxes3; }

std::span<const Offset> Grid::stencil_offsets() const { return dim_ == 2 ? kStencil2 : kStencil3; }

NodeSet::NodeSet(GridPtr grid, std::vector<Index> nodes) : grid_(std::move(grid)), nodes_(std::move(nodes)) {
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  mask_.assign(grid_->size(), 0);
  for (Index n : nodes_) mask_[n] = 1;
}

NodeSet NodeSet::from_predicate(GridPtr grid, const std::function<bool(Index)>& keep) {
  std::vector<Index> nodes;
  for (Index n : grid->inside_nodes())
    if (keep(n)) nodes.push_back(n);
  return NodeSet(std::move(grid), std::move(nodes));
}

NodeSet NodeSet::inside(GridPtr grid) {
  std::vector<Index> nodes(grid->inside_nodes().begin(), grid->inside_nodes().end());
  return NodeSet(std::move(grid), std::move(nodes));
}

bool NodeSet::subset_of(const NodeSet& other) const {
  return std::all_of(nodes_.begin(), nodes_.end(), [&](Index n) { return other.contains(n); });
}

NodeSet NodeSet::minus(const NodeSet& other) const {
  std::vector<Index> out;
  for (Index n : nodes_)
    if (!other.contains(n)) out.push_back(n);
  return NodeSet(grid_, std::move(out));
}

ScalarField::ScalarField(GridPtr grid, double fill) : grid_(std::move(grid)), values_(grid_->size(), fill) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  require(values_.size() == grid_->size(), ErrorKind::Misuse, "field size does not match grid");
}

ScalarField ScalarField::sample(GridPtr grid, const std::function<double(const Point&)>& fn, bool all_nodes) {
  ScalarField f(grid);
  for (Index i = 0; i < static_cast<Index>(grid->size()); ++i)
    if (all_nodes || grid->inside(i)) f[i] = fn(grid->position(i));
  return f;
}

MatrixField::MatrixField(GridPtr grid)
    : grid_(std::move(grid)), stride_(grid_->dim() == 2 ? 3 : 6), data_(grid_->size() * stride_, 0.0) {}

Mat3 MatrixField::at(Index node) const {
  const double* d = data_.data() + std::size_t(node) * stride_;
  Mat3 m = Mat3::Zero();
  if (stride_ == 3) {
    m(0, 0) = d[0];
    m(0, 1) = m(1, 0) = d[1];
    m(1, 1) = d[2];
  } else {
    m(0, 0) = d[0];
    m(0, 1) = m(1, 0) = d[1];
    m(0, 2) = m(2, 0) = d[2];
    m(1, 1) = d[3];
    m(1, 2) = m(2, 1) = d[4];
    m(2, 2) = d[5];
  }
  return m;
}

void MatrixField::set(Index node, const Mat3& m) {
  double* d = data_.data() + std::size_t(node) * stride_;
  if (stride_ == 3) {
    d[0] = m(0, 0);
    d[1] = m(0, 1);
    d[2] = m(1, 1);
  } else {
    d[0] = m(0, 0);
    d[1] = m(0, 1);
    d[2] = m(0, 2);
    d[3] = m(1, 1);
    d[4] = m(1, 2);
    d[5] = m(2, 2);
  }
}

}  // namespace malab
