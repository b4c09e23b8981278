#pragma once

#include <vector>

#include "malab/fit.hpp"
#include "malab/potential.hpp"

namespace malab {

/// Sublevel set {u < ℓ + t} of u minus its supporting affine function ℓ at x0.
struct Section {
  GridPtr grid;
  Point x0{};            // snapped to the nearest node
  Index center_node = -1;
  double t = 0.0;
  NodeSet nodes;
  double volume = 0.0;
  Point com{};           // centroid of the node set
  double mu = 0.0;       // ∫_S f
};

/// All sections about one center. Keeps the height w = u - ℓ and a sorted
/// order of the inside nodes so volumes and measures at any height are cheap.
class SectionFamily {
 public:
  /// x0 snaps to the nearest inside node; ∇u there comes from the state.
  SectionFamily(const PotentialState& state, const Point& x0);

  const ScalarField& height() const { return w_; }
  Index center_node() const { return center_; }
  Point x0() const;
  const PotentialState& state() const { return *state_; }

  /// Largest t with S(x0, t) compactly inside Ω (no boundary-adjacent node
  /// and two layers of inside nodes around every node).
  double max_height() const { return max_height_; }

  /// Throws ErrorKind::Parameter for t <= 0 and ErrorKind::NotContained when
  /// the section reaches the boundary layer.
  Section section(double t) const;
  Section section_unchecked(double t) const;

  double volume(double t) const;
  double measure(double t) const;

 private:
  const PotentialState* state_;
  Index center_;
  ScalarField w_;
  std::vector<Index> order_;       // inside nodes by increasing w
  std::vector<double> sorted_w_;
  std::vector<double> prefix_mu_;  // prefix sums of f h^d along order_
  double max_height_ = 0.0;
};

Section build_section(const PotentialState& state, const Point& x0, double t);

/// α-dilation about the centroid, by pull-back membership through the nearest node.
Section dilate_section(const Section& s, double alpha, const PotentialState& state);

/// Every node of a and its axis neighbours lie in b.
bool compactly_inside(const NodeSet& a, const NodeSet& b);

/// Each axis line meets the set in an interval.
bool grid_convex(const NodeSet& s);

/// Fits log |S| against log t; extra holds ratio_min/ratio_max of |S| / t^(n/2).
FitReport volume_growth_report(const PotentialState& state, const Point& x0, const std::vector<double>& heights);

struct DoublingParams {
  double alpha = 0.5;
  double beta = 0.0;        // max μ(S(t)) / μ(α S(t/2))
  double beta_prime = 0.0;  // max μ(S(2t)) / μ(S(t))
  std::vector<double> heights;
};

DoublingParams doubling_report(const PotentialState& state, const Point& x0, const std::vector<double>& heights,
                               double alpha);

}  // namespace malab
