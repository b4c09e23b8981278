#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "malab/error.hpp"
#include "malab/harness.hpp"

namespace fixtures {

inline constexpr double pi = std::numbers::pi;

// Closed-form potential sampled on the grid; f is the constant det D²u.
inline malab::PotentialState closed(const std::string& domain, const std::string& u, double h, double f = 1.0) {
  malab::ExperimentConfig c;
  c.domain = domain;
  c.potential = u;
  c.density = std::to_string(f);
  c.lambda = c.Lambda = f;
  return malab::build_state(c, h);
}

// u = |x|²/2 shifted to vanish on |x| = R.
inline malab::PotentialState paraboloid(int dim, double R, double h) {
  const std::string r2 = dim == 2 ? "x^2 + y^2" : "x^2 + y^2 + z^2";
  return closed((dim == 2 ? "disk:" : "ball:") + std::to_string(R), "(" + r2 + " - " + std::to_string(R * R) + ")/2", h);
}

inline double norm(const malab::Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

// Green's function of -Δ on the ball of radius R with pole at the origin.
inline double radial_green(int dim, double r, double R) {
  return dim == 2 ? std::log(R / r) / (2 * pi) : (1.0 / r - 1.0 / R) / (4 * pi);
}

}  // namespace fixtures
