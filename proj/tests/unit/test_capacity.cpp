#include <doctest.h>

#include "fixtures.hpp"

using namespace malab;
using fixtures::pi;

namespace {

struct Radial {
  PotentialState st;
  SectionFamily fam;
  Radial(int dim, double h, double omega) : st(fixtures::paraboloid(dim, omega, h)), fam(st, Point{}) {}
};

}  // namespace

TEST_CASE("annulus capacity in 2D is 2 pi / log(R/r)") {
  Radial r(2, 1.0 / 128, 1.2);
  Region V = Region::of_domain(r.st.grid, ConvexDomain::ball(2, 0.8));
  // K = {w <= 0.02} = closed disk of radius 0.2.
  CapacityResult c = sublevel_capacity(r.st, V, r.fam.height(), 0.02);
  CHECK(c.value == doctest::Approx(2 * pi / std::log(4.0)).epsilon(0.03));
  CHECK(c.flux == doctest::Approx(c.value).epsilon(0.01));
  CHECK(c.min_perturbation_gain >= 0.0);
  double lo = 1.0, hi = 0.0;
  for (Index n : c.V) {
    lo = std::min(lo, c.potential[n]);
    hi = std::max(hi, c.potential[n]);
  }
  CHECK(lo >= -1e-12);
  CHECK(hi <= 1.0 + 1e-12);
}

TEST_CASE("ball capacity in 3D is 4 pi / (1/r - 1/R)") {
  Radial r(3, 1.0 / 32, 1.1);
  Region V = Region::of_domain(r.st.grid, ConvexDomain::ball(3, 0.8));
  CapacityResult c = sublevel_capacity(r.st, V, r.fam.height(), 0.02);
  CHECK(c.value == doctest::Approx(4 * pi / 3.75).epsilon(0.05));
  CHECK(c.min_perturbation_gain >= 0.0);
}

TEST_CASE("node-set capacity is monotone in K and positive") {
  Radial r(2, 1.0 / 64, 1.2);
  LinearizedOperator op(r.st, Region::of_domain(r.st.grid, ConvexDomain::ball(2, 0.8)));
  double prev = 0.0;
  for (double t : {0.005, 0.02, 0.08}) {
    CapacityResult c = capacity(op, closed_section(r.fam, t));
    CHECK(c.value > prev);
    CHECK(c.residual < 1e-6);
    double sum = 0.0;
    for (double b : c.breakdown) sum += b;
    CHECK(sum == doctest::Approx(c.value));
    prev = c.value;
  }
  CHECK_THROWS_AS(capacity(op, NodeSet(r.st.grid, {})), Error);
}

TEST_CASE("K filling V leaves only the boundary layer energy") {
  Radial r(2, 1.0 / 32, 1.2);
  LinearizedOperator op(r.st, Region::of_domain(r.st.grid, ConvexDomain::ball(2, 0.8)));
  CapacityResult c = capacity(op, op.nodes());
  for (Index n : op.nodes()) CHECK(c.potential[n] == 1.0);
  CHECK(c.value == doctest::Approx(op.quadratic_form(c.potential)));
  CHECK(c.value > 0.0);
}

TEST_CASE("cutoff profiles hit their endpoint values") {
  for (int n : {3, 4}) {
    CHECK(gamma_power(0.1, 0.1, n) == 1.0);
    CHECK(gamma_power(0.2, 0.1, n) == 0.0);
    CHECK(gamma_power(0.05, 0.1, n) == 1.0);
  }
  CHECK(gamma_log(0.01, 0.01) == doctest::Approx(1.0));
  CHECK(gamma_log(0.1, 0.01) == doctest::Approx(0.0));
  const double mid = gamma_power(0.15, 0.1, 3);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
}

TEST_CASE("2D cutoff is optimal on the radial solution") {
  Radial r(2, 1.0 / 128, 1.4142135623730951);
  CutoffReport c = cutoff_energy_2d(r.fam, 0.01);
  CHECK(c.bound == doctest::Approx(8 * pi / std::log(100.0)).epsilon(0.03));
  CHECK(c.capacity == doctest::Approx(c.bound).epsilon(0.05));
  CHECK(c.energy >= c.capacity);
}

TEST_CASE("3D cutoff energy dominates capacity with a bounded ratio") {
  Radial r(3, 1.0 / 16, 1.1);
  LinearizedOperator op(r.st, Region::of_domain(r.st.grid, ConvexDomain::ball(3, 1.0)));
  for (double t : {0.04, 0.08}) {
    CutoffReport c = cutoff_energy_3d(op, r.fam, t);
    CHECK(c.energy >= c.capacity);
    CHECK(c.energy / c.capacity < 10.0);
    CHECK(c.energy / c.bound < 50.0);
  }
}

TEST_CASE("reciprocity: g times capacity sandwiches one") {
  Radial r(2, 1.0 / 128, 1.2);
  LinearizedOperator op(r.st, Region::of_domain(r.st.grid, ConvexDomain::ball(2, 1.0)));
  GreenFunction g = GreenSolver(op).solve(r.fam.center_node());
  for (const ReciprocityRow& row : reciprocity_check(op, r.fam, g, {0.02, 0.08})) {
    CHECK(row.lo == doctest::Approx(1.0).epsilon(0.03));
    CHECK(row.hi == doctest::Approx(1.0).epsilon(0.03));
    CHECK(row.lo <= row.hi);
  }
}

TEST_CASE("reciprocity sandwich holds for the anisotropic paraboloid") {
  PotentialState st = fixtures::closed("disk:1.4142135623730951", "(2*x^2 + y^2/2)/2 - 1", 1.0 / 64);
  SectionFamily fam(st, Point{});
  LinearizedOperator op(st, Region::sublevel(fam.height(), 0.45));
  GreenFunction g = GreenSolver(op).solve(fam.center_node());
  for (const ReciprocityRow& row : reciprocity_check(op, fam, g, {0.02, 0.08})) {
    CHECK(row.lo >= 0.8);
    CHECK(row.hi <= 1.25);
    CHECK(row.lo <= 1.0 + 0.05);
    CHECK(row.hi >= 1.0 - 0.05);
  }
}

TEST_CASE("level-set capacity is the reciprocal of the level") {
  Radial r(2, 1.0 / 128, 1.2);
  LinearizedOperator op(r.st, Region::of_domain(r.st.grid, ConvexDomain::ball(2, 1.0)));
  GreenFunction g = GreenSolver(op).solve(r.fam.center_node());
  const double a = std::log(2.0) / (2 * pi);
  LevelSetCapacity l = level_set_capacity(g, a, op);
  CHECK(l.resolved);
  CHECK(l.cap == doctest::Approx(2 * pi / std::log(2.0)).epsilon(0.03));
  CHECK(l.product == doctest::Approx(1.0).epsilon(0.03));
  LevelSetCapacity l2 = level_set_capacity(g, 2 * a, op);
  CHECK(l2.cap == doctest::Approx(l.cap / 2).epsilon(0.05));
  CHECK_THROWS_AS(level_set_capacity(g, 1e6, op), Error);
}
