#include "malab/quadrature.hpp"

#include <algorithm>
#include <string>

#include "malab/error.hpp"

namespace malab {

double integrate_region(const ScalarField& field, const NodeSet& region) {
  const Grid& g = field.grid();
  double sum = 0.0;
  for (Index n : region) {
    if (!g.inside(n)) fail(ErrorKind::Domain, "integration region contains exterior node " + std::to_string(n));
    if (!field.defined(n)) fail(ErrorKind::Domain, "field undefined at node " + std::to_string(n));
    sum += field[n];
  }
  return sum * g.cell_volume();
}

VectorField central_gradient(const ScalarField& f) {
  const Grid& g = f.grid();
  VectorField grad(f.grid_ptr());
  const double h = g.h();
  for (Index n = 0; n < static_cast<Index>(g.size()); ++n) {
    if (!f.defined(n)) continue;
    for (int k = 0; k < g.dim(); ++k) {
      Offset o{0, 0, 0};
      o[k] = 1;
      Index p = g.neighbor(n, o);
      o[k] = -1;
      Index m = g.neighbor(n, o);
      bool hp = p >= 0 && f.defined(p);
      bool hm = m >= 0 && f.defined(m);
      if (hp && hm) grad[n][k] = (f[p] - f[m]) / (2.0 * h);
      else if (hp) grad[n][k] = (f[p] - f[n]) / h;
      else if (hm) grad[n][k] = (f[n] - f[m]) / h;
    }
  }
  return grad;
}

ScalarField gradient_norm(const ScalarField& f) {
  VectorField grad = central_gradient(f);
  ScalarField out(f.grid_ptr());
  for (Index n = 0; n < static_cast<Index>(f.grid().size()); ++n)
    if (f.defined(n)) out[n] = grad[n].norm();
  return out;
}

SurfaceIntegral level_surface_integral(const ScalarField& density, const ScalarField& level_fn,
                                       double level, const ScalarField& grad_norm) {
  const Grid& g = level_fn.grid();
  double lo = 1e300, hi = -1e300;
  for (Index n : g.inside_nodes()) {
    if (!level_fn.defined(n)) continue;
    lo = std::min(lo, level_fn[n]);
    hi = std::max(hi, level_fn[n]);
  }
  if (!(level > lo && level < hi))
    fail(ErrorKind::Degenerate, "level " + std::to_string(level) + " outside the range of the level function");

  // Start from the gradient at endpoints of edges crossing the level, then
  // widen to the shell itself; a few passes settle it.
  double gcross = 0.0;
  for (Index n : g.inside_nodes()) {
    if (!level_fn.defined(n) || !grad_norm.defined(n)) continue;
    for (const Offset& o : g.axis_offsets()) {
      Index q = g.neighbor(n, o);
      if (q < 0 || !g.inside(q) || !level_fn.defined(q) || !grad_norm.defined(q)) continue;
      if ((level_fn[n] < level) == (level_fn[q] < level)) continue;
      gcross = std::max({gcross, grad_norm[n], grad_norm[q]});
    }
  }
  double delta = kShellFactor * g.h() * gcross;
  for (int pass = 0; pass < 4 && delta > 0.0; ++pass) {
    double local = 0.0;
    for (Index n : g.inside_nodes())
      if (level_fn.defined(n) && grad_norm.defined(n) && std::abs(level_fn[n] - level) < delta)
        local = std::max(local, grad_norm[n]);
    if (local <= 0.0) break;
    delta = kShellFactor * g.h() * local;
  }
  if (!(delta > 0.0)) fail(ErrorKind::Degenerate, "level function is flat near the requested level");

  SurfaceIntegral out;
  out.shell_width = delta;
  double sum = 0.0;
  for (Index n : g.inside_nodes()) {
    if (!level_fn.defined(n)) continue;
    double s = std::abs(level_fn[n] - level);
    if (s >= delta) continue;
    if (!density.defined(n) || !grad_norm.defined(n)) continue;
    ++out.shell_nodes;
    double weight = (1.0 - s / delta) / delta;
    sum += density[n] * grad_norm[n] * weight;
  }
  if (out.shell_nodes == 0) fail(ErrorKind::Degenerate, "empty coarea shell");
  out.value = sum * g.cell_volume();
  return out;
}

SurfaceIntegral level_surface_integral(const ScalarField& density, const ScalarField& level_fn, double level) {
  return level_surface_integral(density, level_fn, level, gradient_norm(level_fn));
}

}  // namespace malab
