#include "malab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "linsolve.hpp"
#include "malab/error.hpp"
#include "stencil.hpp"

namespace malab {

using detail::CutStencil;

DensitySpec::DensitySpec() : fn_([](const Point&, double) { return 1.0; }) {}

DensitySpec DensitySpec::constant(double value) {
  require(value > 0.0 && std::isfinite(value), ErrorKind::Precondition, "density must be positive");
  DensitySpec d;
  d.fn_ = [value](const Point&, double) { return value; };
  d.lambda_ = d.Lambda_ = value;
  std::ostringstream os;
  os.precision(17);
  os << value;
  d.label_ = os.str();
  return d;
}

DensitySpec DensitySpec::parse(std::string_view expr, double lambda, double Lambda) {
  Expression e = Expression::parse(expr);
  return function(
      [e](const Point& x, double h) { return e(ExprVars{x[0], x[1], x[2], h}); }, lambda, Lambda,
      std::string(expr));
}

DensitySpec DensitySpec::function(Fn fn, double lambda, double Lambda, std::string label) {
  require(lambda > 0.0 && Lambda >= lambda, ErrorKind::Configuration,
          "density bounds need 0 < lambda <= Lambda");
  DensitySpec d;
  d.fn_ = std::move(fn);
  d.lambda_ = lambda;
  d.Lambda_ = Lambda;
  d.label_ = std::move(label);
  return d;
}

ScalarField DensitySpec::sample(const GridPtr& grid) const {
  ScalarField f(grid);
  constexpr double slack = 1e-12;
  for (Index n : grid->inside_nodes()) {
    double v = fn_(grid->position(n), grid->h());
    if (!std::isfinite(v) || v < lambda_ - slack || v > Lambda_ + slack) {
      auto p = grid->position(n);
      std::ostringstream os;
      os << "density " << label_ << " = " << v << " at (" << p[0] << ", " << p[1] << ", " << p[2]
         << ") violates [" << lambda_ << ", " << Lambda_ << "]";
      fail(ErrorKind::Precondition, os.str());
    }
    f[n] = std::clamp(v, lambda_, Lambda_);
  }
  return f;
}

namespace {

// Residual det D²u - f at every inside node (by rank).
Eigen::VectorXd ma_residual(const CutStencil& st, const Grid& g, std::span<const double> u,
                            const ScalarField& f) {
  auto inside = g.inside_nodes();
  Eigen::VectorXd r(inside.size());
  for (std::size_t k = 0; k < inside.size(); ++k) {
    Mat3 H = detail::hessian_at(st, g, int(k), u);
    r[k] = detail::det_of(H, g.dim()) - f[inside[k]];
  }
  return r;
}

// Adds coefficient c times the three-point difference along dir into row k.
void add_second(std::vector<Eigen::Triplet<double>>& trip, const CutStencil& st, const Grid& g, int k,
                int dir, double c) {
  if (c == 0.0) return;
  detail::Weights w = st.second(k, dir);
  const auto& a = st.arms(k, dir);
  trip.emplace_back(k, k, c * w.center);
  if (a.fwd.node >= 0) trip.emplace_back(k, g.inside_rank(a.fwd.node), c * w.fwd);
  if (a.bwd.node >= 0) trip.emplace_back(k, g.inside_rank(a.bwd.node), c * w.bwd);
}

void fill_derived(PotentialState& s, const CutStencil& st) {
  const Grid& g = *s.grid;
  const int dim = g.dim();
  s.grad_u = VectorField(s.grid);
  s.hess_u = MatrixField(s.grid);
  s.cofactor = MatrixField(s.grid);
  auto u = s.u.values();
  double res = 0.0, emin = 1e300;
  auto inside = g.inside_nodes();
  for (std::size_t k = 0; k < inside.size(); ++k) {
    Index n = inside[k];
    Mat3 H = detail::hessian_at(st, g, int(k), u);
    s.hess_u.set(n, H);
    s.cofactor.set(n, detail::cofactor_of(H, dim));
    s.grad_u[n] = detail::gradient_at(st, g, int(k), u);
    res = std::max(res, std::abs(detail::det_of(H, dim) - s.f[n]));
    emin = std::min(emin, detail::min_eigenvalue(H, dim));
  }
  s.residual = res;
  s.min_hessian_eig = inside.empty() ? 0.0 : emin;
}

}  // namespace

PotentialState solve_monge_ampere(const GridPtr& grid, const DensitySpec& density, const SolveOptions& opt) {
  require(opt.tol >= 1e-10, ErrorKind::Configuration, "solver tolerance must be >= 1e-10");
  const Grid& g = *grid;
  const int dim = g.dim();
  PotentialState s;
  s.grid = grid;
  s.density = density;
  s.f = density.sample(grid);

  CutStencil st(g, [&](Index q) { return g.inside(q); });
  auto inside = g.inside_nodes();
  const auto N = static_cast<Eigen::Index>(inside.size());
  std::vector<double> u(g.size(), 0.0);

  // Start from Δu = n f^(1/n): convex and of the right scale.
  {
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(N);
    for (Eigen::Index k = 0; k < N; ++k) {
      for (int d = 0; d < dim; ++d) add_second(trip, st, g, int(k), d, 1.0);
      rhs[k] = dim * std::pow(s.f[inside[k]], 1.0 / dim);
    }
    detail::SpMat A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd u0 = detail::solve_general(A, rhs, "initial Poisson solve", dim == 2);
    for (Eigen::Index k = 0; k < N; ++k) u[inside[k]] = u0[k];
  }

  Eigen::VectorXd F = ma_residual(st, g, u, s.f);
  double res = F.lpNorm<Eigen::Infinity>();
  int it = 0;
  std::vector<double> trial(u.size(), 0.0);
  while (res > opt.tol) {
    if (it >= opt.max_newton)
      throw SolverFailure("Newton did not converge in " + std::to_string(it) + " steps", res, it);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(N) * (dim == 2 ? 9 : 19) * 2);
    for (Eigen::Index k = 0; k < N; ++k) {
      Mat3 H = detail::hessian_at(st, g, int(k), u);
      Mat3 C = detail::cofactor_of(detail::project_eigen(H, dim, opt.eig_floor), dim);
      for (int d = 0; d < dim; ++d) add_second(trip, st, g, int(k), d, C(d, d));
      int dir = dim;
      for (int i = 0; i < dim; ++i)
        for (int j = i + 1; j < dim; ++j, dir += 2) {
          add_second(trip, st, g, int(k), dir, C(i, j));
          add_second(trip, st, g, int(k), dir + 1, -C(i, j));
        }
    }
    detail::SpMat J(N, N);
    J.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd delta = detail::solve_general(J, -F, "Newton step", dim == 2);

    double step = 1.0;
    bool accepted = false;
    for (int half = 0; half <= opt.max_halvings; ++half) {
      trial = u;
      for (Eigen::Index k = 0; k < N; ++k) trial[inside[k]] += step * delta[k];
      Eigen::VectorXd Ft = ma_residual(st, g, trial, s.f);
      double rt = Ft.lpNorm<Eigen::Infinity>();
      if (std::isfinite(rt) && rt < res) {
        u.swap(trial);
        F = std::move(Ft);
        res = rt;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++it;
    if (!accepted) throw SolverFailure("line search failed after " + std::to_string(opt.max_halvings) + " halvings", res, it);
  }

  s.u = ScalarField(grid);
  for (Index n : inside) s.u[n] = u[n];
  s.newton_iters = it;
  fill_derived(s, st);
  return s;
}

PotentialState solve_monge_ampere(const ConvexDomain& domain, const DensitySpec& density, double h, double tol) {
  SolveOptions opt;
  opt.tol = tol;
  return solve_monge_ampere(Grid::build(domain, h), density, opt);
}

PotentialState potential_from_field(ScalarField u, const DensitySpec& density) {
  GridPtr grid = u.grid_ptr();
  const Grid& g = *grid;
  for (Index n : g.inside_nodes())
    require(u.defined(n), ErrorKind::Domain, "potential undefined at inside node " + std::to_string(n));
  PotentialState s;
  s.grid = grid;
  s.density = density;
  s.f = density.sample(grid);
  s.u = std::move(u);
  CutStencil st(g, [&](Index q) { return s.u.defined(q); });
  fill_derived(s, st);
  return s;
}

PotentialState potential_from_function(const GridPtr& grid, const std::function<double(const Point&)>& u,
                                       const DensitySpec& density) {
  return potential_from_field(ScalarField::sample(grid, u, true), density);
}

MatrixField compute_cofactor(const PotentialState& state) {
  MatrixField out(state.grid);
  for (Index n : state.g().inside_nodes()) out.set(n, detail::cofactor_of(state.hess_u.at(n), state.dim()));
  return out;
}

double sobolev_energy(const PotentialState& state, double eps, const NodeSet& region) {
  require(eps >= 0.0, ErrorKind::Parameter, "sobolev exponent offset must be >= 0");
  const Grid& g = state.g();
  double sum = 0.0;
  for (Index n : region) {
    require(g.inside(n), ErrorKind::Domain, "region leaves the domain");
    double lap = state.hess_u.at(n).trace();
    sum += std::pow(std::max(lap, 0.0), 1.0 + eps);
  }
  return sum * g.cell_volume();
}

double cofactor_divergence(const PotentialState& state) {
  const Grid& g = state.g();
  const int dim = g.dim();
  double worst = 0.0;
  for (Index n : g.inside_nodes()) {
    Vec3 div = Vec3::Zero();
    bool ok = true;
    for (int j = 0; j < dim && ok; ++j) {
      Offset o{0, 0, 0};
      o[j] = 1;
      Index p = g.neighbor(n, o);
      o[j] = -1;
      Index m = g.neighbor(n, o);
      if (!g.inside(p) || !g.inside(m)) {
        ok = false;
        break;
      }
      Mat3 Up = state.cofactor.at(p), Um = state.cofactor.at(m);
      for (int i = 0; i < dim; ++i) div[i] += (Up(i, j) - Um(i, j)) / (2.0 * g.h());
    }
    if (ok) worst = std::max(worst, div.norm());
  }
  return worst;
}

InvariantReport check_invariants(const PotentialState& state, double tol) {
  const Grid& g = state.g();
  const int dim = g.dim();
  InvariantReport r;
  r.max_u = -1e300;
  r.min_eig = 1e300;
  r.min_axis_second_diff = 1e300;
  for (Index n : g.inside_nodes()) {
    r.max_u = std::max(r.max_u, state.u[n]);
    Mat3 H = state.hess_u.at(n);
    Mat3 U = state.cofactor.at(n);
    r.min_eig = std::min(r.min_eig, detail::min_eigenvalue(H, dim));
    double detH = detail::det_of(H, dim);
    Mat3 I = Mat3::Zero();
    for (int k = 0; k < dim; ++k) I(k, k) = detH;
    double scale = std::max({std::abs(detH), (U * H).cwiseAbs().maxCoeff(), 1e-300});
    r.cofactor_identity = std::max(r.cofactor_identity, (U * H - I).cwiseAbs().maxCoeff() / scale);
    double want = std::pow(detH, dim - 1);
    double got = detail::det_of(U, dim);
    r.det_identity = std::max(r.det_identity, std::abs(got - want) / std::max({std::abs(want), std::abs(got), 1e-300}));
    for (int k = 0; k < dim; ++k) {
      Offset o{0, 0, 0};
      o[k] = 1;
      Index p = g.neighbor(n, o);
      o[k] = -1;
      Index m = g.neighbor(n, o);
      if (g.inside(p) && g.inside(m))
        r.min_axis_second_diff =
            std::min(r.min_axis_second_diff, (state.u[p] - 2 * state.u[n] + state.u[m]) / (g.h() * g.h()));
    }
  }
  double slack = 10.0 * std::max(tol, state.residual);
  r.ok = r.max_u <= slack && r.min_eig >= -slack && r.min_axis_second_diff >= -slack &&
         r.cofactor_identity <= 1e-12 && r.det_identity <= 1e-10;
  return r;
}

}  // namespace malab
