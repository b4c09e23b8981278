#include <doctest.h>

#include <Eigen/LU>

#include "fixtures.hpp"
#include "malab/quadrature.hpp"

using namespace malab;
using fixtures::pi;

namespace {

PotentialState newton(const std::string& domain, const std::string& f, double lo, double hi, double h,
                      double tol = 1e-8, int max_newton = 200) {
  ExperimentConfig c;
  c.domain = domain;
  c.density = f;
  c.lambda = lo;
  c.Lambda = hi;
  c.solver_tol = tol;
  c.max_newton = max_newton;
  return build_state(c, h);
}

double max_error(const PotentialState& st, const std::function<double(const Point&)>& exact) {
  double e = 0.0;
  for (Index n : st.g().inside_nodes()) e = std::max(e, std::abs(st.u[n] - exact(st.g().position(n))));
  return e;
}

double r2(const Point& x) { return x[0] * x[0] + x[1] * x[1] + x[2] * x[2]; }

}  // namespace

TEST_CASE("radial solution on the disk within 5 h^2") {
  const double h = 1.0 / 32;
  PotentialState st = newton("disk:1.4142135623730951", "1", 1, 1, h);
  CHECK(st.residual <= 1e-8);
  CHECK(max_error(st, [](const Point& x) { return (r2(x) - 2) / 2; }) <= 5 * h * h);
  CHECK(check_invariants(st, 1e-8).ok);
}

TEST_CASE("radial solution on the ball within 5 h^2") {
  const double h = 1.0 / 8;
  PotentialState st = newton("ball:1.4142135623730951", "1", 1, 1, h);
  CHECK(st.residual <= 1e-8);
  CHECK(max_error(st, [](const Point& x) { return (r2(x) - 2) / 2; }) <= 5 * h * h);
}

TEST_CASE("ellipse with constant density matches the quadratic solution") {
  // u = c (x²/a² + y²/b² - 1) with 4c²/(a²b²) = f.
  const double a = 1.0, b = 0.5, f = 2.0, c = a * b * std::sqrt(f) / 2, h = 1.0 / 64;
  PotentialState st = newton("ellipse:1,0.5", "2", 2, 2, h);
  CHECK(max_error(st, [&](const Point& x) { return c * (x[0] * x[0] / (a * a) + x[1] * x[1] / (b * b) - 1); }) <=
        5 * h * h);
}

TEST_CASE("unimodular change of variables keeps det D2u = 1") {
  PotentialState disk = newton("disk:1", "1", 1, 1, 1.0 / 32);
  PotentialState ell = newton("ellipse:2,0.5", "1", 1, 1, 1.0 / 32);
  CHECK(disk.residual <= 1e-8);
  CHECK(ell.residual <= 1e-8);
  // ũ(x) = u(Tx) with T = diag(1/2, 2) maps the ellipse onto the unit disk.
  const double c = 0.5;
  CHECK(max_error(ell, [&](const Point& x) { return c * (x[0] * x[0] / 4 + 4 * x[1] * x[1] - 1); }) < 0.01);
}

TEST_CASE("comparison principle orders solutions by density") {
  const double h = 1.0 / 32;
  const std::string dom = "disk:1.4142135623730951";
  PotentialState lo = newton(dom, "0.5", 0.5, 0.5, h);
  PotentialState mid = newton(dom, "1 + 0.5*sin(4*x)*sin(4*y)", 0.5, 1.5, h);
  PotentialState hi = newton(dom, "1.5", 1.5, 1.5, h);
  for (Index n : mid.g().inside_nodes()) {
    CHECK(lo.u[n] >= mid.u[n] - 1e-9);
    CHECK(mid.u[n] >= hi.u[n] - 1e-9);
  }
}

TEST_CASE("solution is convex and nonpositive") {
  PotentialState st = newton("disk:1.4142135623730951", "1 + 0.5*sin(4*x)*sin(4*y)", 0.5, 1.5, 1.0 / 32);
  InvariantReport inv = check_invariants(st, 1e-8);
  CHECK(inv.ok);
  CHECK(inv.max_u <= 0.0);
  CHECK(inv.min_axis_second_diff >= -1e-7);
  CHECK(inv.cofactor_identity <= 1e-12);
  CHECK(inv.det_identity <= 1e-10);
  CHECK(st.min_hessian_eig >= -10 * st.residual);
}

TEST_CASE("density outside its bounds is a precondition error") {
  try {
    newton("disk:1", "0.2", 0.5, 1.5, 1.0 / 16);
    FAIL("expected a precondition error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Precondition);
  }
}

TEST_CASE("Newton stopping short of tolerance is a solver failure carrying the residual") {
  try {
    newton("disk:1.4142135623730951", "1 + 0.5*sin(4*x)*sin(4*y)", 0.5, 1.5, 1.0 / 32, 1e-10, 1);
    FAIL("expected a solver failure");
  } catch (const SolverFailure& e) {
    CHECK(e.residual() > 1e-10);
    CHECK(exit_code_for(e.kind()) == 3);
  }
}

TEST_CASE("cofactor of quadratics is constant") {
  PotentialState a = fixtures::closed("disk:1", "(x^2 + y^2)/2 - 0.5", 1.0 / 16);
  PotentialState b = fixtures::closed("disk:1", "(2*x^2 + y^2/2)/2 - 1", 1.0 / 16);
  PotentialState c = fixtures::closed("ball:1", "(x^2 + y^2 + z^2)/2 - 0.5", 1.0 / 8);
  MatrixField ua = compute_cofactor(a), ub = compute_cofactor(b), uc = compute_cofactor(c);
  for (Index n : a.g().inside_nodes()) {
    CHECK((ua.at(n).topLeftCorner<2, 2>() - Eigen::Matrix2d::Identity()).norm() < 1e-9);
    Eigen::Matrix2d m = ub.at(n).topLeftCorner<2, 2>();
    CHECK(m(0, 0) == doctest::Approx(0.5));
    CHECK(m(1, 1) == doctest::Approx(2.0));
    CHECK(m(0, 1) == doctest::Approx(0.0));
    CHECK(m.determinant() == doctest::Approx(1.0));
  }
  for (Index n : c.g().inside_nodes()) {
    CHECK((uc.at(n) - Mat3::Identity()).norm() < 1e-9);
  }
}

TEST_CASE("cofactor divergence vanishes under refinement") {
  auto div = [](double h) {
    return cofactor_divergence(fixtures::closed("disk:1", "exp((x^2 + y^2)/2) + 0.3*x^4 - exp(0.5) - 0.3", h));
  };
  const double d1 = div(1.0 / 32), d2 = div(1.0 / 64);
  CHECK(d2 < d1);
}

TEST_CASE("Sobolev energy of quadratics") {
  PotentialState a = fixtures::closed("disk:1", "(x^2 + y^2)/2 - 0.5", 1.0 / 128);
  PotentialState b = fixtures::closed("disk:1", "(2*x^2 + y^2/2)/2 - 1", 1.0 / 128);
  NodeSet all = NodeSet::inside(a.grid);
  const double area = integrate_region(ScalarField(a.grid, 1.0), all);
  CHECK(sobolev_energy(a, 1.0, all) == doctest::Approx(4 * pi).epsilon(0.01));
  CHECK(sobolev_energy(a, 0.0, all) == doctest::Approx(2 * area).epsilon(0.01));
  CHECK(sobolev_energy(b, 1.0, NodeSet::inside(b.grid)) == doctest::Approx(6.25 * area).epsilon(0.01));
  CHECK_THROWS_AS(sobolev_energy(a, -0.5, all), Error);
}

TEST_CASE("exp radial solution converges at second order") {
  // u = exp(|x|²/2) - e has det D²u = (1 + |x|²) exp(|x|²).
  std::vector<double> hs{1.0 / 16, 1.0 / 32}, err;
  for (double h : hs) {
    PotentialState st = newton("disk:1.4142135623730951", "(1+r^2)*exp(r^2)", 1.0, 3.0 * std::exp(2.0), h);
    err.push_back(max_error(st, [](const Point& x) { return std::exp(r2(x) / 2) - std::exp(1.0); }));
  }
  CHECK(err[1] <= 5 * hs[1] * hs[1] * std::exp(1.0));
  CHECK(observed_orders(hs, err).front() >= 1.7);
}
