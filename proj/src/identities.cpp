#include "malab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "malab/error.hpp"
#include "malab/quadrature.hpp"
#include "stencil.hpp"

namespace malab {

double relative_discrepancy(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-14});
}

namespace {

IdentityReport make_report(std::string name, double h, double left, double right, double tol) {
  IdentityReport r;
  r.name = std::move(name);
  r.h = h;
  r.left = left;
  r.right = right;
  r.rel_err = relative_discrepancy(left, right);
  r.tolerance = tol;
  r.pass = r.rel_err <= tol;
  return r;
}

// Level of g 1.5 shell widths above zero, with the shell width taken from the
// gradient near the boundary of V.
double inner_level(const GreenFunction& g, const ScalarField& grad_norm) {
  const Grid& grid = g.g.grid();
  double G = 0.0;
  for (Index n : g.domain)
    for (const Offset& o : grid.axis_offsets())
      for (int s : {1, -1})
        if (!g.domain.contains(grid.neighbor(n, {s * o[0], s * o[1], s * o[2]}))) G = std::max(G, grad_norm[n]);
  require(G > 0.0, ErrorKind::Degenerate, "gradient of g vanishes at the boundary of V");
  double level = 1.5 * kShellFactor * grid.h() * G;
  for (int pass = 0; pass < 4; ++pass) {
    double delta = level / 1.5;
    double local = 0.0;
    for (Index n : g.domain)
      if (g.g[n] > 0.0 && g.g[n] < level + delta) local = std::max(local, grad_norm[n]);
    if (local <= 0.0) break;
    level = 1.5 * kShellFactor * grid.h() * local;
  }
  return level;
}

// U ∇f·∇f / |∇f| at every inside node where the gradient is nonzero.
ScalarField flux_density(const PotentialState& state, const VectorField& grad, const ScalarField& weight) {
  ScalarField out(state.grid);
  for (Index n : state.g().inside_nodes()) {
    double norm = grad[n].norm();
    if (!(norm > 0.0)) {
      out[n] = 0.0;
      continue;
    }
    double w = weight.grid_ptr() ? weight[n] : 1.0;
    out[n] = w * grad[n].dot(state.cofactor.at(n) * grad[n]) / norm;
  }
  return out;
}

}  // namespace

IdentityReport green_mass_identity(const SectionFamily& sections, double t, const GreenFunction& g, double tolerance) {
  const PotentialState& st = sections.state();
  const int n = st.dim();
  require(g.pole == sections.center_node(), ErrorKind::Misuse, "Green's function pole differs from the section center");
  Region sec = Region::sublevel(sections.height(), t);
  if (sec.nodes.nodes().size() != g.domain.size() || !sec.nodes.subset_of(g.domain))
    fail(ErrorKind::Misuse, "Green's function domain is not the section of height " + std::to_string(t));
  double left = 0.0, mass = 0.0;
  for (Index k : g.domain) {
    if (k == g.pole) continue;
    left += n * st.f[k] * g.g[k];
    mass += g.g[k];
  }
  const double hd = st.g().cell_volume();
  left *= hd;
  mass *= hd;
  IdentityReport r = make_report("green_mass", st.g().h(), left, t, tolerance);
  r.extra["mass"] = mass;
  r.extra["mass_lower"] = t / (n * st.density.Lambda());
  r.extra["mass_upper"] = t / (n * st.density.lambda());
  r.extra["bracket_ok"] = (mass >= (1.0 - tolerance) * r.extra["mass_lower"] &&
                           mass <= (1.0 + tolerance) * r.extra["mass_upper"])
                              ? 1.0
                              : 0.0;
  r.extra["pole_cell_excluded"] = 1.0;
  return r;
}

IdentityReport rho_unit_mass(const PotentialState& state, const GreenFunction& g, double tolerance) {
  VectorField grad = central_gradient(g.g);
  ScalarField gn = gradient_norm(g.g);
  double s = inner_level(g, gn);
  SurfaceIntegral I = level_surface_integral(flux_density(state, grad, {}), g.g, s, gn);
  IdentityReport r = make_report("rho_unit_mass", state.g().h(), I.value, 1.0, tolerance);
  r.extra["level"] = s;
  r.extra["shell_width"] = I.shell_width;
  r.extra["shell_nodes"] = double(I.shell_nodes);
  return r;
}

std::vector<IdentityReport> boundary_flux_identity(const SectionFamily& sections, const std::vector<double>& heights,
                                                   double tolerance) {
  const PotentialState& st = sections.state();
  const Grid& g = st.g();
  const Vec3 g0 = st.grad_u[sections.center_node()];
  VectorField grad(st.grid);
  ScalarField gn(st.grid);
  for (Index n : g.inside_nodes()) {
    grad[n] = st.grad_u[n] - g0;
    gn[n] = grad[n].norm();
  }
  ScalarField dens = flux_density(st, grad, {});
  std::vector<IdentityReport> out;
  for (double s : heights) {
    Section sec = sections.section(s);
    if (nodes_across(sec) < 8)
      fail(ErrorKind::Resolution, "section of height " + std::to_string(s) + " is under-resolved");
    SurfaceIntegral I = level_surface_integral(dens, sections.height(), s, gn);
    if (I.shell_width > 0.5 * s)
      fail(ErrorKind::Resolution, "coarea shell at height " + std::to_string(s) + " is wider than half the height");
    IdentityReport r = make_report("boundary_flux", g.h(), I.value, st.dim() * sec.mu, tolerance);
    r.extra["t"] = s;
    r.extra["shell_width"] = I.shell_width;
    out.push_back(r);
  }
  return out;
}

IdentityReport trace_bound_check(const SectionFamily& sections, const GreenFunction& g, double t, double tolerance) {
  const PotentialState& st = sections.state();
  const Grid& grid = st.g();
  const int n = st.dim();
  require(g.pole == sections.center_node(), ErrorKind::Misuse, "Green's function pole differs from the section center");
  VectorField grad = central_gradient(g.g);
  ScalarField gn = gradient_norm(g.g);
  const double s = inner_level(g, gn);
  const Point x0 = grid.position(g.pole);
  auto norm2 = [](const Point& p) { return p[0] * p[0] + p[1] * p[1] + p[2] * p[2]; };

  double left = 0.0;
  for (Index k : g.domain) {
    if (k == g.pole || g.g[k] <= s) continue;
    left += st.cofactor.at(k).trace() * (g.g[k] - s);
  }
  left *= 2.0 * grid.cell_volume();
  ScalarField x2(st.grid);
  for (Index k : grid.inside_nodes()) x2[k] = norm2(grid.position(k));
  SurfaceIntegral I = level_surface_integral(flux_density(st, grad, x2), g.g, s, gn);
  IdentityReport r = make_report("trace_identity", grid.h(), left, I.value - norm2(x0), tolerance);

  double trace_S = 0.0;
  for (Index k : sections.section_unchecked(t).nodes) trace_S += st.cofactor.at(k).trace();
  trace_S *= grid.cell_volume();
  double rmax = 0.0;
  for (Index k : g.domain)
    for (const Offset& o : grid.axis_offsets())
      for (int sg : {1, -1})
        if (!g.domain.contains(grid.neighbor(k, {sg * o[0], sg * o[1], sg * o[2]})))
          rmax = std::max(rmax, norm2(grid.position(k)));
  double scale = n == 2 ? 1.0 / std::abs(std::log(t)) : std::pow(t, 0.5 * (n - 2));
  r.extra["t"] = t;
  r.extra["level"] = s;
  r.extra["trace_integral"] = trace_S;
  r.extra["trace_bound_ratio"] = trace_S / (scale * (rmax - norm2(x0)));
  return r;
}

IdentityReport abp_dual_bound(const PotentialState& state, const GreenFunction& g) {
  const int n = state.dim();
  const double q = double(n) / (n - 1);
  const double hd = state.g().cell_volume();
  double sum = 0.0;
  for (Index k : g.domain)
    if (k != g.pole) sum += std::pow(std::max(g.g[k], 0.0), q);
  double left = std::pow(sum * hd, 1.0 / q);
  double right = std::pow(double(g.domain.size()) * hd, 1.0 / n);
  IdentityReport r = make_report("abp_dual", state.g().h(), left, right, INFINITY);
  r.extra["ratio"] = left / right;
  r.pass = std::isfinite(left);
  return r;
}

std::size_t pointwise_cofactor_violations(const PotentialState& state, int fields, std::uint64_t seed) {
  const Grid& g = state.g();
  const int dim = g.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  std::size_t bad = 0;
  for (int f = 0; f < fields; ++f) {
    Vec3 a(unif(rng), unif(rng), dim == 3 ? unif(rng) : 0.0);
    double b = unif(rng);
    for (Index n : g.inside_nodes()) {
      Point p = g.position(n);
      double phase = a[0] * p[0] + a[1] * p[1] + a[2] * p[2] + b;
      Vec3 dv = a * std::cos(phase);
      Mat3 H = state.hess_u.at(n);
      Mat3 U = state.cofactor.at(n);
      double lhs = dv.dot(U * dv);
      double lap = H.trace();
      if (!(lap > 0.0)) continue;
      double rhs = detail::det_of(H, dim) * dv.squaredNorm() / lap;
      double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
      if (lhs < rhs - 1e-12 * scale) ++bad;
    }
  }
  return bad;
}

IdentityReport log_energy_bound(const LinearizedOperator& op, const SectionFamily& sections, const GreenFunction& g,
                                double r, std::uint64_t seed) {
  const PotentialState& st = sections.state();
  require(st.dim() == 2, ErrorKind::Dimension, "the logarithmic energy bound is checked in two dimensions");
  require(g.pole == sections.center_node(), ErrorKind::Misuse, "Green's function pole differs from the section center");
  Section S = sections.section(r);
  for (Index k : S.nodes)
    if (!(g.g[k] > 0.0))
      fail(ErrorKind::Degenerate, "positivity violation: g <= 0 at node " + std::to_string(k) + " of the section");
  const Grid& grid = st.g();
  auto offsets = grid.stencil_offsets();
  double sum = 0.0;
  for (Index p : S.nodes) {
    if (p == g.pole) continue;
    for (int d = 0; d < int(offsets.size()); ++d) {
      Index q = grid.neighbor(p, offsets[d]);
      if (!S.nodes.contains(q) || q == g.pole) continue;
      double L2 = offset_norm(offsets[d]) * offset_norm(offsets[d]) * grid.h() * grid.h();
      double c = 0.5 * (op.node_weight(p, d) + op.node_weight(q, d)) / L2;
      double diff = std::log(g.g[p]) - std::log(g.g[q]);
      sum += c * diff * diff;
    }
  }
  double left = sum * grid.cell_volume();
  double right = S.mu / r;
  IdentityReport rep = make_report("log_energy", grid.h(), left, right, INFINITY);
  rep.extra["ratio"] = left / right;
  rep.extra["pointwise_violations"] = double(pointwise_cofactor_violations(st, 3, seed));
  rep.pass = std::isfinite(left) && rep.extra["pointwise_violations"] == 0.0;
  return rep;
}

}  // namespace malab
