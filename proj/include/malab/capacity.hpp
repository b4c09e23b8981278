#pragma once

#include <cstdint>
#include <vector>

#include "malab/green.hpp"

namespace malab {

/// Equilibrium potential of K in V (the operator's region) and its energy.
struct CapacityResult {
  double value = 0.0;          // Q(Φ) = h^d Φᵀ A Φ
  double flux = 0.0;           // h^d Σ_K (A Φ)
  double residual = 0.0;       // max |A Φ| over V \ K, relative to max |A Φ| on K
  double min_perturbation_gain = 0.0;  // min over trials of Q(Φ̃) - Q(Φ); >= 0 for a minimizer
  ScalarField potential;
  std::vector<double> breakdown;  // Q split over stencil directions
  NodeSet K;
  NodeSet V;
};

/// Solves A Φ = 0 on V \ K with Φ = 1 on K and Φ = 0 outside V, then compares
/// Q(Φ) with `perturbations` random admissible competitors. Throws
/// ErrorKind::Parameter for empty K and ErrorKind::Domain when K leaves V.
/// K = V gives Φ ≡ 1 on V.
CapacityResult capacity(const LinearizedOperator& op, const NodeSet& K, std::uint64_t seed = 1,
                        int perturbations = 5);

/// Capacity of K = {w <= t} in the region V with ∂K placed between nodes by
/// linear interpolation of w, the same cut-cell treatment ∂V receives. The
/// equilibrium potential lives on V \ K; value is the Dirichlet energy
/// including the cut edges and flux the current through ∂K, equal at the
/// minimizer. K ∩ V must be nonempty and leave free nodes.
CapacityResult sublevel_capacity(const PotentialState& state, const Region& V, const ScalarField& w, double t,
                                 std::uint64_t seed = 1, int perturbations = 5);

/// Closed section {w <= t}.
NodeSet closed_section(const SectionFamily& sections, double t);

/// Cutoff profiles applied to the section height w. gamma_power is 1 below t,
/// 0 above 2t and interpolates s^{-(n-2)/2} between; gamma_log is 1 below t,
/// 0 above √t and 2 log s / log t - 1 between.
double gamma_power(double s, double t, int n);
double gamma_log(double s, double t);

struct CutoffReport {
  double t = 0.0;
  double energy = 0.0;     // Q(γ ∘ w)
  double capacity = 0.0;   // cap(S̄(t), V) over node potentials, where γ ∘ w is admissible
  double bound = 0.0;      // 3D: μ(S(t))/t; 2D: 8/|log t|² ∫_t^{√t} μ(S(s)) ds/s²
};

/// 3D: cutoff energy against capacity of S̄(t) in the region of op. Requires
/// S(2t) compactly inside V.
CutoffReport cutoff_energy_3d(const LinearizedOperator& op, const SectionFamily& sections, double t);
/// 2D: V = S(√t); requires 0 < t < 1 and S(√t) compactly inside Ω.
CutoffReport cutoff_energy_2d(const SectionFamily& sections, double t);

struct ReciprocityRow {
  double t = 0.0;
  double g_min = 0.0;
  double g_max = 0.0;
  double cap = 0.0;
  double lo = 0.0;  // g_min * cap
  double hi = 0.0;  // g_max * cap
};

/// min g·cap <= 1 <= max g·cap on ∂S(t) for each t, g with pole at the section center.
std::vector<ReciprocityRow> reciprocity_check(const LinearizedOperator& op, const SectionFamily& sections,
                                              const GreenFunction& g, const std::vector<double>& heights);

struct LevelSetCapacity {
  double a = 0.0;
  double cap = 0.0;
  double product = 0.0;  // a * cap, 1 in the continuum
  int nodes_across = 0;
  bool resolved = false;  // J_a at least 8 nodes across
};

/// Capacity of J_a = {g >= a} in V (cut-cell boundary at g = a). Throws ErrorKind::Degenerate unless
/// 0 < a < max g and J_a sits compactly inside V.
LevelSetCapacity level_set_capacity(const GreenFunction& g, double a, const LinearizedOperator& op);

}  // namespace malab
