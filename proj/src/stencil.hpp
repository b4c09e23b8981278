#pragma once

// Cut-cell finite differences on the masked grid. A node's arm along an
// offset either reaches the neighbouring node (theta = 1) or stops on the
// boundary of Ω at fraction theta of the offset, where the value is zero.
// Unequal-arm formulas are exact for quadratics.

#include <functional>
#include <vector>

#include "malab/grid.hpp"

namespace malab::detail {

struct Arm {
  Index node = -1;  // -1: the arm ends on the boundary (value 0)
  double theta = 1.0;
};

struct DirectionArms {
  Arm fwd;
  Arm bwd;
};

/// Three-point coefficients of a difference along one stencil direction.
struct Weights {
  double center = 0.0;
  double fwd = 0.0;
  double bwd = 0.0;
};

class CutStencil {
 public:
  /// has_value(q) says whether node q carries a value; otherwise the arm is cut
  /// on the domain boundary by bisection on the domain level function.
  CutStencil(const Grid& grid, const std::function<bool(Index)>& has_value);

  int directions() const { return ndirs_; }
  const DirectionArms& arms(int rank, int dir) const { return arms_[std::size_t(rank) * ndirs_ + dir]; }
  /// Second derivative along the unit vector of stencil direction dir.
  Weights second(int rank, int dir) const;
  /// First derivative along axis dir (< dim).
  Weights first(int rank, int dir) const;

  double value(const Arm& a, std::span<const double> u_by_node) const {
    return a.node >= 0 ? u_by_node[a.node] : 0.0;
  }

 private:
  const Grid& grid_;
  int ndirs_;
  std::vector<double> length_;
  std::vector<DirectionArms> arms_;
};

/// Hessian at an inside node from node values (arms ending on the boundary read 0).
Mat3 hessian_at(const CutStencil& st, const Grid& grid, int rank, std::span<const double> u);
Vec3 gradient_at(const CutStencil& st, const Grid& grid, int rank, std::span<const double> u);

double det_of(const Mat3& m, int dim);
Mat3 cofactor_of(const Mat3& m, int dim);
double min_eigenvalue(const Mat3& m, int dim);
/// Symmetric matrix with eigenvalues clamped below at floor.
Mat3 project_eigen(const Mat3& m, int dim, double floor);

}  // namespace malab::detail
