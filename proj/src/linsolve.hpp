#pragma once

#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "malab/error.hpp"

namespace malab::detail {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Nonsymmetric sparse solve: sparse LU, or Jacobi-preconditioned BiCGSTAB.
inline Eigen::VectorXd solve_general(const SpMat& A, const Eigen::VectorXd& b, const std::string& what,
                                     bool direct, double rel_tol = 1e-12) {
  if (direct) {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverFailure(what + ": LU factorization failed", -1.0, 0);
    Eigen::VectorXd x = lu.solve(b);
    return x;
  }
  SpMatRow Ar = A;
  Eigen::BiCGSTAB<SpMatRow, Eigen::DiagonalPreconditioner<double>> it;
  it.setTolerance(rel_tol);
  it.setMaxIterations(20000);
  it.compute(Ar);
  if (it.info() != Eigen::Success) throw SolverFailure(what + ": preconditioner setup failed", -1.0, 0);
  Eigen::VectorXd x = it.solve(b);
  if (it.info() != Eigen::Success && it.error() > 1e3 * rel_tol)
    throw SolverFailure(what + ": BiCGSTAB did not converge", it.error(), static_cast<int>(it.iterations()));
  return x;
}

}  // namespace malab::detail
