#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "malab/capacity.hpp"
#include "malab/green.hpp"

namespace malab {

struct IdentityReport {
  std::string name;
  double h = 0.0;
  double left = 0.0;
  double right = 0.0;
  double rel_err = 0.0;  // |left - right| / max(|left|, |right|, 1e-14)
  double tolerance = 0.0;
  bool pass = false;
  std::map<std::string, double> extra;
};

double relative_discrepancy(double a, double b);

/// ∫_V n f g = t for V = S(x0, t) and g its Green's function with pole x0.
/// extra: mass = ∫_V g with the bracket t/(nΛ) <= ∫ g <= t/(nλ). Throws
/// ErrorKind::Misuse when g does not live on the section of height t.
IdentityReport green_mass_identity(const SectionFamily& sections, double t, const GreenFunction& g,
                                   double tolerance = 0.03);

/// Flux of U ∇g through {g = s} equals 1. The level s sits 1.5 shell widths
/// inside V so the coarea shell avoids the boundary layer; g - s is the Green's
/// function of {g > s}.
IdentityReport rho_unit_mass(const PotentialState& state, const GreenFunction& g, double tolerance = 0.05);

/// ∫_{∂S(s)} U∇w·∇w/|∇w| = n ∫_{S(s)} f, with w the section height. Throws
/// ErrorKind::Resolution for sections under 8 nodes across or when the coarea
/// shell half-width exceeds s/2.
std::vector<IdentityReport> boundary_flux_identity(const SectionFamily& sections, const std::vector<double>& heights,
                                                   double tolerance = 0.04);

/// 2 ∫ trace U (g - s)₊ = ∫_{g = s} |x|² ρ - |x0|², and the ratio
/// ∫_{S(t)} trace U / [t^{(n-2)/2} or |log t|^{-1}] (max_{∂V}|x|² - |x0|²) in extra.
IdentityReport trace_bound_check(const SectionFamily& sections, const GreenFunction& g, double t,
                                 double tolerance = 0.04);

/// ‖g‖_{L^{n/(n-1)}(V)} against |V|^{1/n}; pole cell excluded. left/right is
/// the reported ratio.
IdentityReport abp_dual_bound(const PotentialState& state, const GreenFunction& g);

/// ∫_S U∇g·∇g/g² (edge quadrature with the operator weights, pole cell
/// excluded) against μ(S)/r, S = S(x0, r). extra: pointwise_violations of
/// U∇v·∇v >= det D²u |∇v|²/Δu over random smooth v.
IdentityReport log_energy_bound(const LinearizedOperator& op, const SectionFamily& sections, const GreenFunction& g,
                                double r, std::uint64_t seed = 7);

/// Number of inside nodes where U∇v·∇v < det(H)|∇v|²/tr(H) beyond round-off,
/// over `fields` random v = sin(a·x + b).
std::size_t pointwise_cofactor_violations(const PotentialState& state, int fields, std::uint64_t seed);

}  // namespace malab
