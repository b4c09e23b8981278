#include <doctest.h>

#include "fixtures.hpp"

using namespace malab;
using fixtures::pi;
using fixtures::radial_green;

namespace {

// u = |x|²/2 on Ω = B(omega) with V = B(v).
struct Radial {
  PotentialState st;
  SectionFamily fam;
  LinearizedOperator op;
  GreenFunction g;

  Radial(int dim, double h, double omega, double v)
      : st(fixtures::paraboloid(dim, omega, h)),
        fam(st, Point{}),
        op(st, Region::of_domain(st.grid, ConvexDomain::ball(dim, v))),
        g(GreenSolver(op).solve(fam.center_node())) {}
};

Index interior_node(const Grid& g, const Point& x) { return g.nearest_node(x); }

}  // namespace

TEST_CASE("paraboloid gives the standard Laplacian stencil") {
  for (int dim : {2, 3}) {
    const double h = dim == 2 ? 1.0 / 32 : 1.0 / 8;
    PotentialState st = fixtures::paraboloid(dim, 1.0, h);
    LinearizedOperator op(st, Region::of_domain(st.grid, ConvexDomain::ball(dim, 1.0)));
    const SparseMatrix& A = op.matrix();
    Index c = interior_node(st.g(), {0, 0, 0});
    const int i = op.local(c);
    CHECK(A.coeff(i, i) == doctest::Approx(2.0 * dim / (h * h)));
    for (int k = 0; k < dim; ++k) {
      Offset o{0, 0, 0};
      o[k] = 1;
      CHECK(A.coeff(i, op.local(st.g().neighbor(c, o))) == doctest::Approx(-1.0 / (h * h)));
    }
    // Diagonal stencil directions carry no weight when U = I.
    CHECK(A.coeff(i, op.local(st.g().neighbor(c, {1, 1, 0}))) == 0.0);
  }
}

TEST_CASE("anisotropic paraboloid gives the anisotropic stencil") {
  const double h = 1.0 / 32;
  PotentialState st = fixtures::closed("disk:1.4142135623730951", "(2*x^2 + y^2/2)/2 - 1", h);
  LinearizedOperator op(st, Region::of_domain(st.grid, ConvexDomain::ball(2, 1.0)));
  const SparseMatrix& A = op.matrix();
  Index c = interior_node(st.g(), {0, 0, 0});
  const int i = op.local(c);
  CHECK(A.coeff(i, i) == doctest::Approx(5.0 / (h * h)));
  CHECK(A.coeff(i, op.local(st.g().neighbor(c, {1, 0, 0}))) == doctest::Approx(-0.5 / (h * h)));
  CHECK(A.coeff(i, op.local(st.g().neighbor(c, {0, 1, 0}))) == doctest::Approx(-2.0 / (h * h)));
}

TEST_CASE("operator is symmetric with zero row sums away from the boundary") {
  ExperimentConfig cfg;
  cfg.density = "1 + 0.5*sin(4*x)*sin(4*y)";
  cfg.lambda = 0.5;
  cfg.Lambda = 1.5;
  PotentialState st = build_state(cfg, 1.0 / 32);
  SectionFamily fam(st, Point{});
  LinearizedOperator op(st, Region::sublevel(fam.height(), 0.45));
  const SparseMatrix& A = op.matrix();
  CHECK((SparseMatrix(A.transpose()) - A).norm() <= 1e-12 * A.norm());
  Eigen::VectorXd sums = A * Eigen::VectorXd::Ones(A.rows());
  const Grid& g = st.g();
  int checked = 0;
  for (Index n : op.nodes()) {
    bool full = true;
    for (const Offset& o : g.stencil_offsets())
      for (int s : {1, -1}) full = full && op.nodes().contains(g.neighbor(n, {s * o[0], s * o[1], s * o[2]}));
    if (!full) continue;
    CHECK(std::abs(sums[op.local(n)]) <= 1e-9 * A.coeff(op.local(n), op.local(n)));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("2D Green's function matches the logarithmic kernel") {
  Radial r(2, 1.0 / 64, 1.2, 1.0);
  double worst = 0.0;
  for (Index n : r.op.nodes()) {
    const double d = fixtures::norm(r.st.g().position(n));
    if (d < 0.2 || d > 0.8) continue;
    worst = std::max(worst, std::abs(r.g.g[n] / radial_green(2, d, 1.0) - 1));
  }
  CHECK(worst < 0.03);
  for (Index n : r.op.nodes()) CHECK(r.g.g[n] > 0.0);
}

TEST_CASE("3D Green's function matches the Newtonian kernel") {
  Radial r(3, 1.0 / 16, 1.2, 1.0);
  double worst = 0.0;
  for (Index n : r.op.nodes()) {
    const double d = fixtures::norm(r.st.g().position(n));
    if (d < 0.3 || d > 0.7) continue;
    worst = std::max(worst, std::abs(r.g.g[n] / radial_green(3, d, 1.0) - 1));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("Green's function is symmetric in its arguments") {
  ExperimentConfig cfg;
  cfg.density = "1 + 0.5*sin(4*x)*sin(4*y)";
  cfg.lambda = 0.5;
  cfg.Lambda = 1.5;
  PotentialState st = build_state(cfg, 1.0 / 32);
  LinearizedOperator op(st, Region::of_domain(st.grid, ConvexDomain::ball(2, 1.0)));
  GreenSolver solver(op);
  const Point x{0.1, 0.2, 0}, y{-0.3, 0.05, 0};
  GreenFunction gx = solver.solve(x), gy = solver.solve(y);
  CHECK(gx.g[gy.pole] == doctest::Approx(gy.g[gx.pole]).epsilon(1e-8));
  CHECK_THROWS_AS(solver.solve(Point{1.1, 0, 0}), Error);
}

TEST_CASE("fixed-density bounds: 3D slope -1/2 and 2D logarithmic growth") {
  Radial b(3, 1.0 / 32, 1.1, 1.0);
  FitReport f3 = verify_bounds_fixed_density(b.g, b.fam, b.op.nodes(), {0.005, 0.01, 0.02, 0.04, 0.08, 0.16});
  CHECK(f3.slope == doctest::Approx(-0.5).epsilon(0.1));
  Radial d(2, 1.0 / 64, 1.2, 1.0);
  FitReport f2 = verify_bounds_fixed_density(d.g, d.fam, d.op.nodes(), {0.005, 0.01, 0.02, 0.04, 0.08});
  CHECK(f2.r2 >= 0.98);
  // g(∂S(t)) = (1/2π) log(1/√(2t)) so the slope against |log t| is 1/(4π).
  CHECK(f2.slope == doctest::Approx(1 / (4 * pi)).epsilon(0.05));
}

TEST_CASE("doubling ratio is nearly constant on the radial disk") {
  Radial d(2, 1.0 / 64, 1.2, 1.0);
  FitReport r = verify_bounds_doubling(d.g, d.fam, d.op.nodes(), {0.004, 0.016, 0.064});
  CHECK(r.extra["spread"] < 1.5);
  // g(∂S(t)) / (|log t| / π) = (1 - log 2 / |log t|) / 4 in the continuum.
  for (auto [t, ratio] : r.points) {
    const double L = std::abs(std::log(t));
    CHECK(ratio == doctest::Approx((1 - std::log(2.0) / L) / 4).epsilon(0.05));
  }
  // ∫_t^{√t} 2πs/s² ds = π|log t|.
  const double t = 0.01;
  CHECK(doubling_denominator(d.fam, t, std::sqrt(t)) == doctest::Approx(pi * std::abs(std::log(t))).epsilon(0.05));
}

TEST_CASE("gradient L^p norms: converge below 2, grow above 2") {
  auto lp_integral = [](double h, double p) {
    Radial r(2, h, 1.2, 1.0);
    return gradient_lp_integral(r.g, r.fam.section(0.125), p);
  };
  const double a = lp_integral(1.0 / 32, 1.5), b = lp_integral(1.0 / 64, 1.5);
  CHECK(b / a == doctest::Approx(1.0).epsilon(0.1));
  const double c = lp_integral(1.0 / 32, 2.5), e = lp_integral(1.0 / 64, 2.5);
  CHECK(std::pow(e, 2.5) / std::pow(c, 2.5) > 1.2);
}

TEST_CASE("distribution of g decays with exponent -3 in 3D") {
  Radial b(3, 1.0 / 32, 1.1, 1.0);
  FitReport r = distribution_decay(b.g, b.st, {0.02, 0.03, 0.045, 0.0675, 0.10125, 0.151875, 0.2278125});
  CHECK(std::abs(r.slope + 3.0) <= 0.1);
  Radial d(2, 1.0 / 32, 1.2, 1.0);
  try {
    distribution_decay(d.g, d.st, {0.1, 0.2, 0.3, 0.4});
    FAIL("expected a dimension error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Dimension);
  }
}

TEST_CASE("removable singularity: zero inner data converges, critical data does not") {
  PotentialState st = fixtures::paraboloid(2, 1.2, 1.0 / 64);
  RemovableDemoConfig zero;
  zero.inner = InnerData::Zero;
  RemovableDemoReport z = removable_singularity_demo(st, zero);
  CHECK(z.decreasing);

  RemovableDemoConfig bad;
  bad.inner = InnerData::Custom;
  bad.custom = [](double r) { return 2.0 * critical_rate(2, r); };
  CHECK_THROWS_AS(removable_singularity_demo(st, bad), Error);

  CHECK(critical_rate(3, 0.25) == doctest::Approx(2.0));
  CHECK(critical_rate(2, std::exp(-2.0)) == doctest::Approx(2.0));
}

TEST_CASE("Harnack ratio on a shell matches the logarithmic ratio") {
  Radial d(2, 1.0 / 64, 1.2, 1.0);
  // log(1/0.283) / log(1/0.4) ≈ 1.38 in the continuum.
  CHECK(harnack_ratio(d.g, d.fam.height(), 0.08) == doctest::Approx(1.38).epsilon(0.1));
}
