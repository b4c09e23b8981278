#include "stencil.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace malab::detail {

namespace {

double cut_fraction(const Grid& grid, Index node, const Offset& o, int sign) {
  Point p = grid.position(node);
  const ConvexDomain& d = grid.domain();
  auto at = [&](double s) {
    Point x = p;
    for (int k = 0; k < 3; ++k) x[k] += sign * s * o[k] * grid.h();
    return d.level(x);
  };
  double lo = 0.0, hi = 1.0;
  if (at(hi) < 0.0) return 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (at(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::max(0.5 * (lo + hi), 1e-6);
}

}  // namespace

CutStencil::CutStencil(const Grid& grid, const std::function<bool(Index)>& has_value)
    : grid_(grid), ndirs_(static_cast<int>(grid.stencil_offsets().size())) {
  auto offsets = grid.stencil_offsets();
  for (const auto& o : offsets) length_.push_back(offset_norm(o) * grid.h());
  auto inside = grid.inside_nodes();
  arms_.resize(inside.size() * ndirs_);
  for (std::size_t r = 0; r < inside.size(); ++r) {
    Index n = inside[r];
    for (int d = 0; d < ndirs_; ++d) {
      const Offset& o = offsets[d];
      Offset neg{-o[0], -o[1], -o[2]};
      DirectionArms& a = arms_[r * ndirs_ + d];
      Index f = grid.neighbor(n, o);
      Index b = grid.neighbor(n, neg);
      if (f >= 0 && has_value(f)) a.fwd = {f, 1.0};
      else a.fwd = {-1, cut_fraction(grid, n, o, +1)};
      if (b >= 0 && has_value(b)) a.bwd = {b, 1.0};
      else a.bwd = {-1, cut_fraction(grid, n, o, -1)};
    }
  }
}

Weights CutStencil::second(int rank, int dir) const {
  const DirectionArms& a = arms(rank, dir);
  double L = length_[dir];
  double tf = a.fwd.theta, tb = a.bwd.theta;
  Weights w;
  w.fwd = 2.0 / (L * L * tf * (tf + tb));
  w.bwd = 2.0 / (L * L * tb * (tf + tb));
  w.center = -(w.fwd + w.bwd);
  return w;
}

Weights CutStencil::first(int rank, int dir) const {
  const DirectionArms& a = arms(rank, dir);
  double h = length_[dir];
  double tf = a.fwd.theta, tb = a.bwd.theta;
  double denom = h * tf * tb * (tf + tb);
  Weights w;
  w.fwd = tb * tb / denom;
  w.bwd = -tf * tf / denom;
  w.center = (tf * tf - tb * tb) / denom;
  return w;
}

Mat3 hessian_at(const CutStencil& st, const Grid& grid, int rank, std::span<const double> u) {
  const int dim = grid.dim();
  Index n = grid.inside_nodes()[rank];
  auto D = [&](int dir) {
    Weights w = st.second(rank, dir);
    const DirectionArms& a = st.arms(rank, dir);
    return w.center * u[n] + w.fwd * st.value(a.fwd, u) + w.bwd * st.value(a.bwd, u);
  };
  Mat3 H = Mat3::Zero();
  for (int k = 0; k < dim; ++k) H(k, k) = D(k);
  // Diagonal pairs follow the axes: (e_i + e_j, e_i - e_j) for i < j.
  int dir = dim;
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      double hij = 0.5 * (D(dir) - D(dir + 1));
      H(i, j) = H(j, i) = hij;
      dir += 2;
    }
  }
  return H;
}

Vec3 gradient_at(const CutStencil& st, const Grid& grid, int rank, std::span<const double> u) {
  Index n = grid.inside_nodes()[rank];
  Vec3 g = Vec3::Zero();
  for (int k = 0; k < grid.dim(); ++k) {
    Weights w = st.first(rank, k);
    const DirectionArms& a = st.arms(rank, k);
    g[k] = w.center * u[n] + w.fwd * st.value(a.fwd, u) + w.bwd * st.value(a.bwd, u);
  }
  return g;
}

double det_of(const Mat3& m, int dim) {
  if (dim == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return m.determinant();
}

Mat3 cofactor_of(const Mat3& m, int dim) {
  Mat3 c = Mat3::Zero();
  if (dim == 2) {
    c(0, 0) = m(1, 1);
    c(1, 1) = m(0, 0);
    c(0, 1) = -m(1, 0);
    c(1, 0) = -m(0, 1);
    return c;
  }
  // Transposed adjugate; equals the adjugate for symmetric input.
  c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  c(0, 1) = -(m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0));
  c(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  c(1, 0) = -(m(0, 1) * m(2, 2) - m(0, 2) * m(2, 1));
  c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  c(1, 2) = -(m(0, 0) * m(2, 1) - m(0, 1) * m(2, 0));
  c(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  c(2, 1) = -(m(0, 0) * m(1, 2) - m(0, 2) * m(1, 0));
  c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return c;
}

double min_eigenvalue(const Mat3& m, int dim) {
  if (dim == 2) {
    Eigen::Matrix2d a = m.topLeftCorner<2, 2>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.computeDirect(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  es.computeDirect(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

Mat3 project_eigen(const Mat3& m, int dim, double floor) {
  Mat3 out = Mat3::Zero();
  if (dim == 2) {
    Eigen::Matrix2d a = m.topLeftCorner<2, 2>();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es;
    es.computeDirect(a);
    if (es.eigenvalues()[0] >= floor) return m;
    Eigen::Vector2d ev = es.eigenvalues().cwiseMax(floor);
    out.topLeftCorner<2, 2>() = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
  es.computeDirect(m);
  if (es.eigenvalues()[0] >= floor) return m;
  Eigen::Vector3d ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace malab::detail
