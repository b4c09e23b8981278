#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "malab/fit.hpp"
#include "malab/operator.hpp"
#include "malab/sections.hpp"

namespace malab {

/// Discrete g_V(·, x0): A g = δ with δ = 1/h^d at the pole, zero outside V.
struct GreenFunction {
  Index pole = -1;
  Point pole_position{};
  ScalarField g;
  NodeSet domain;
  double source_mass = 1.0;
  int iterations = 0;
  double solver_error = 0.0;
};

/// Factorizes the operator once and solves for any number of poles.
class GreenSolver {
 public:
  explicit GreenSolver(const LinearizedOperator& op, double rel_tol = 1e-10);
  /// Throws ErrorKind::Domain when the pole is not a node of V.
  GreenFunction solve(Index pole) const;
  GreenFunction solve(const Point& x0) const;
  const LinearizedOperator& op() const { return *op_; }

 private:
  const LinearizedOperator* op_;
  SpdSolver solver_;
};

GreenFunction green_function(const LinearizedOperator& op, const Point& x0);

/// Values of f on the level set {w = t}, by linear interpolation along the
/// axis edges that cross it.
struct LevelSample {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t crossings = 0;
};
/// Throws ErrorKind::Degenerate when no axis edge crosses the level.
LevelSample sample_on_level(const ScalarField& f, const ScalarField& w, double t);

/// Fewest nodes across the section along the axis lines through its center.
int nodes_across(const Section& s);

/// Bound checks for g on section boundaries. V is the region of op and the
/// pole is the section center. 3D fits the dyadic increments
/// g(∂S(t)) - g(∂S(2t)) in log-log (extra: raw_slope_min/max for min and max
/// of g itself); 2D fits mean g on ∂S(t) against |log t|. Heights whose
/// section is under 8 nodes across are dropped (extra: resolution_floor).
FitReport verify_bounds_fixed_density(const GreenFunction& g, const SectionFamily& sections, const NodeSet& V,
                                      const std::vector<double>& heights);

/// Ratio of min g on ∂S(t) to the doubling lower-bound expression:
/// t / μ(S(t)) in 3D and |log t|² / ∫_t^{√t} μ(S(s)) ds/s² in 2D (64-point
/// log-spaced trapezoid). Sections under 8 nodes across are skipped. Points
/// hold (t, ratio); extra: ratio_min, ratio_max, spread, resolution_floor.
FitReport verify_bounds_doubling(const GreenFunction& g, const SectionFamily& sections, const NodeSet& V,
                                 const std::vector<double>& heights);

/// ∫_s μ(S(x0, s)) ds / s² over [a, b] by the trapezoid rule on a log grid.
double doubling_denominator(const SectionFamily& sections, double a, double b, int points = 64);

/// ∫_S |∇g|^p minus the pole cell. 2D only; p > 1.
double gradient_lp_integral(const GreenFunction& g, const Section& s, double p);

/// μ{g > T} for each T; slope fitted by the offset model μ ≈ K (T + b)^p with
/// b scanned for the best R² (extra: raw_slope for b = 0, offset b). 3D only.
FitReport distribution_decay(const GreenFunction& g, const PotentialState& state, const std::vector<double>& levels);

enum class InnerData { Compliant, Zero, Critical, Custom };

struct RemovableDemoConfig {
  double R = 0.4;                       // outer section height
  std::vector<double> r_list{0.1, 0.05, 0.025};
  InnerData inner = InnerData::Compliant;
  std::function<double(double)> custom;  // inner value as a function of r, for Custom
  double outer_value = 1.0;              // used when no boundary field is given
  const ScalarField* boundary = nullptr; // outer data at nodes outside S(R)
  double probe_lo = 0.5;                 // probe annulus in units of R
  double probe_hi = 0.75;
};

struct RemovableDemoReport {
  std::vector<double> r;
  std::vector<double> inner_value;
  std::vector<double> discrepancy;  // max |v - ṽ| on the probe annulus
  bool decreasing = false;
};

/// Compares the solution ṽ of L ṽ = 0 in S(0, R) with solutions v on
/// S(R) \ S(r) carrying inner data on ∂S(r). Custom inner data must decay
/// relative to the critical rate (r^{(2-n)/2} in 3D, |log r| in 2D) along
/// r_list, otherwise ErrorKind::Configuration.
RemovableDemoReport removable_singularity_demo(const PotentialState& state, const RemovableDemoConfig& cfg);

/// Critical and compliant inner data scales.
double critical_rate(int dim, double r);
double compliant_rate(int dim, double r);

/// sup/inf of g over the shell {τ t <= w <= t}.
double harnack_ratio(const GreenFunction& g, const ScalarField& w, double t, double tau = 0.5);

}  // namespace malab
