#pragma once

#include <cstddef>

#include "malab/grid.hpp"

namespace malab {

/// Midpoint rule h^dim * sum(field) over region. Throws ErrorKind::Domain when
/// the region holds an exterior node or the field is undefined on it.
double integrate_region(const ScalarField& field, const NodeSet& region);

/// Gradient by central differences where both axis neighbours are defined and
/// one-sided differences otherwise.
VectorField central_gradient(const ScalarField& f);
ScalarField gradient_norm(const ScalarField& f);

struct SurfaceIntegral {
  double value = 0.0;
  double shell_width = 0.0;  // half-width of the hat kernel in level units
  std::size_t shell_nodes = 0;
};

/// Surface integral of density over {level_fn = level} through the coarea
/// formula: sum over a thin shell of density * |grad level_fn| * K(level_fn - level),
/// K a unit-mass hat of half-width delta = 3 h max|grad level_fn| over the shell.
/// grad_norm supplies |grad level_fn| at the nodes.
SurfaceIntegral level_surface_integral(const ScalarField& density, const ScalarField& level_fn,
                                       double level, const ScalarField& grad_norm);
SurfaceIntegral level_surface_integral(const ScalarField& density, const ScalarField& level_fn,
                                       double level);

/// Shell half-width factor: delta = kShellFactor * h * max|grad|.
inline constexpr double kShellFactor = 3.0;

}  // namespace malab
