#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "malab/potential.hpp"

namespace malab {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Open set V where the linearized operator acts. The node set is what the
/// matrix sees; the optional level field (negative inside V, defined on the
/// neighbours just outside) places ∂V between nodes. Without it ∂V sits on the
/// first node outside.
struct Region {
  NodeSet nodes;
  ScalarField level;

  bool has_level() const { return level.grid_ptr() != nullptr; }

  /// Inside nodes of grid lying in domain (which may differ from the grid's own Ω).
  static Region of_domain(const GridPtr& grid, const ConvexDomain& domain);
  /// {w < t} among the nodes where w is defined and which are inside Ω.
  static Region sublevel(const ScalarField& w, double t);
  /// {a <= w < b}: an annulus between two sublevel sets.
  static Region shell(const ScalarField& w, double a, double b);
  /// {g > s}.
  static Region superlevel(const ScalarField& g, double s);
  static Region of_nodes(NodeSet nodes);
};

struct OperatorStats {
  std::size_t unknowns = 0;
  std::size_t cut_edges = 0;     // boundary edges with a fractional arm
  std::size_t lumped_nodes = 0;  // nodes where cross terms were dropped to keep an M-matrix
};

/// Symmetric matrix of v -> -div(U ∇v) on V with zero Dirichlet data outside.
///
/// U is split at each node into nonnegative weights along the stencil
/// directions: axis weight U_kk - Σ_{j≠k} |U_kj| and diagonal weights
/// 2 max(±U_ij, 0) on e_i ± e_j. An edge inside V carries the mean of its end
/// weights; an edge leaving V adds weight / (θ L²) to the diagonal only. The
/// result is a symmetric M-matrix with zero row sums away from ∂V. Where an
/// axis weight would be negative the node keeps only diag(U) (lumping).
class LinearizedOperator {
 public:
  /// Throws ErrorKind::Assembly when U is not positive definite at a node of V
  /// and ErrorKind::Domain when V leaves Ω.
  LinearizedOperator(const PotentialState& state, Region region);

  const PotentialState& state() const { return *state_; }
  const Grid& grid() const { return state_->g(); }
  const Region& region() const { return region_; }
  const NodeSet& nodes() const { return region_.nodes; }
  std::size_t size() const { return region_.nodes.size(); }
  /// Position of node within nodes(), or -1.
  int local(Index node) const { return local_[node]; }
  const SparseMatrix& matrix() const { return A_; }
  const OperatorStats& stats() const { return stats_; }

  /// Q(v) = h^d vᵀ A v for v restricted to V (zero outside).
  double quadratic_form(const ScalarField& v) const;
  /// Q(v) split over stencil directions; entries sum to quadratic_form(v).
  /// With boundary data, edges leaving V measure v against it instead of 0.
  std::vector<double> energy_breakdown(const ScalarField& v, const ScalarField* boundary = nullptr) const;

  /// Right-hand side carrying Dirichlet data: for every edge leaving V the
  /// value boundary[q] at the outside endpoint q enters as weight/(θL²)·value.
  Eigen::VectorXd boundary_rhs(const ScalarField& boundary) const;

  /// Nonnegative weight of stencil direction dir at a node, after lumping.
  double node_weight(Index node, int dir) const;

  /// Field on the grid from a vector over nodes(); zero on the rest of the inside nodes.
  ScalarField to_field(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_field(const ScalarField& v) const;

 private:
  struct Edge {
    int dir;
    Index q;        // outside endpoint
    double theta;
    double coef;    // weight / (θ L²)
  };
  template <class F>
  void for_each_boundary_edge(F&& fn) const;

  const PotentialState* state_;
  Region region_;
  std::vector<int> local_;
  std::vector<double> weights_;  // nodes() x directions
  std::vector<double> length2_;
  int ndirs_ = 0;
  SparseMatrix A_;
  OperatorStats stats_;
};

/// Solver for the SPD systems of a LinearizedOperator: sparse LDLᵀ in 2D and
/// incomplete-Cholesky CG in 3D (relative tolerance rel_tol).
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& A, int dim, double rel_tol = 1e-10);
  ~SpdSolver();
  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;

  /// Throws SolverFailure when CG stops short of the tolerance.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  bool direct() const;
  int last_iterations() const { return last_iterations_; }
  double last_error() const { return last_error_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable int last_iterations_ = 0;
  mutable double last_error_ = 0.0;
};

/// Solves A x = 0 on free ∩ V with x fixed by values on V \ free and by the
/// boundary data outside V. Returns the field on the grid (boundary data kept
/// outside V where it is defined, zero elsewhere).
ScalarField solve_dirichlet(const LinearizedOperator& op, const NodeSet& free, const ScalarField& fixed_values,
                            const ScalarField* boundary = nullptr, double rel_tol = 1e-10);

}  // namespace malab
