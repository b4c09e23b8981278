#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "malab/expression.hpp"
#include "malab/grid.hpp"

namespace malab {

/// Right-hand side f of det D²u = f with its declared bounds λ ≤ f ≤ Λ.
class DensitySpec {
 public:
  using Fn = std::function<double(const Point&, double h)>;

  DensitySpec();  // f ≡ 1
  static DensitySpec constant(double value);
  /// Closed form over x, y, z, r, h (see Expression).
  static DensitySpec parse(std::string_view expr, double lambda, double Lambda);
  static DensitySpec function(Fn fn, double lambda, double Lambda, std::string label);

  double operator()(const Point& x, double h) const { return fn_(x, h); }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }
  const std::string& label() const { return label_; }

  /// Samples f at the inside nodes and checks the bounds. Violations within
  /// 1e-12 are clamped; larger ones throw ErrorKind::Precondition.
  ScalarField sample(const GridPtr& grid) const;

 private:
  Fn fn_;
  double lambda_ = 1.0;
  double Lambda_ = 1.0;
  std::string label_ = "1";
};

/// Convex solution u of det D²u = f, u = 0 on ∂Ω, with its derivative fields.
/// Derived fields are defined on the inside nodes only.
struct PotentialState {
  GridPtr grid;
  DensitySpec density;
  ScalarField f;
  ScalarField u;
  VectorField grad_u;
  MatrixField hess_u;
  MatrixField cofactor;
  double residual = 0.0;  // max |det D²u - f| over inside nodes
  int newton_iters = 0;
  double min_hessian_eig = 0.0;

  int dim() const { return grid->dim(); }
  const Grid& g() const { return *grid; }
};

struct SolveOptions {
  double tol = 1e-8;
  int max_newton = 200;
  int max_halvings = 30;
  double eig_floor = 1e-8;  // convexity safeguard in the linearization
};

/// Damped Newton on the cut-cell finite-difference system. Throws
/// SolverFailure (carrying the last residual) when Newton stalls and
/// ErrorKind::Precondition when f leaves [λ, Λ].
PotentialState solve_monge_ampere(const GridPtr& grid, const DensitySpec& density, const SolveOptions& opt = {});
PotentialState solve_monge_ampere(const ConvexDomain& domain, const DensitySpec& density, double h, double tol);

/// State from prescribed node values. Nodes with undefined values are treated
/// as outside Ω and arms towards them end on ∂Ω with value 0; a closed form
/// sampled on the whole box therefore gets plain centered stencils.
PotentialState potential_from_field(ScalarField u, const DensitySpec& density);
PotentialState potential_from_function(const GridPtr& grid, const std::function<double(const Point&)>& u,
                                       const DensitySpec& density);

/// 2D: [[u_yy, -u_xy], [-u_xy, u_xx]]; 3D: transposed adjugate of the Hessian.
MatrixField compute_cofactor(const PotentialState& state);

/// ∫_region (Δu)^(1+ε). Throws ErrorKind::Parameter for ε < 0.
double sobolev_energy(const PotentialState& state, double eps, const NodeSet& region);

/// Max over inside nodes of |Σ_j D_j U^{ij}| by central differences, skipping
/// nodes whose axis neighbours are not inside.
double cofactor_divergence(const PotentialState& state);

struct InvariantReport {
  double max_u = 0.0;                 // should be <= 0
  double min_eig = 0.0;               // >= -10 residual
  double min_axis_second_diff = 0.0;  // convexity along grid lines
  double cofactor_identity = 0.0;     // max relative |U H - det H I|
  double det_identity = 0.0;          // max relative |det U - det(H)^(n-1)|
  bool ok = false;
};

InvariantReport check_invariants(const PotentialState& state, double tol);

}  // namespace malab
