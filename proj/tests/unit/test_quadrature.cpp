#include <doctest.h>

#include "fixtures.hpp"
#include "malab/quadrature.hpp"

using namespace malab;
using fixtures::pi;

namespace {

GridPtr disk(double R, double h) { return Grid::build(ConvexDomain::parse("disk:" + std::to_string(R)), h); }

ScalarField half_r2(const GridPtr& g) {
  return ScalarField::sample(g, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
}

}  // namespace

TEST_CASE("midpoint rule recovers the disk area and second moment") {
  GridPtr g = disk(1.0, 1.0 / 128);
  NodeSet all = NodeSet::inside(g);
  ScalarField one(g, 1.0);
  CHECK(integrate_region(one, all) == doctest::Approx(pi).epsilon(0.01));
  ScalarField r2 = ScalarField::sample(g, [](const Point& x) { return x[0] * x[0] + x[1] * x[1]; });
  CHECK(integrate_region(r2, all) == doctest::Approx(pi / 2).epsilon(0.01));
  CHECK(integrate_region(ScalarField(g, 0.0), all) == 0.0);
}

TEST_CASE("integration is linear in the field and monotone in the region") {
  GridPtr g = disk(1.0, 1.0 / 32);
  NodeSet all = NodeSet::inside(g);
  NodeSet half = NodeSet::from_predicate(g, [&](Index n) { return g->inside(n) && g->position(n)[0] < 0.0; });
  ScalarField a = ScalarField::sample(g, [](const Point& x) { return 1.0 + x[0] * x[0]; });
  ScalarField b = ScalarField::sample(g, [](const Point& x) { return 2.0 + std::sin(x[1]); });
  std::vector<double> sum(g->size());
  for (Index n : all) sum[n] = 3.0 * a[n] - b[n];
  ScalarField c(g, std::move(sum));
  CHECK(integrate_region(c, all) == doctest::Approx(3.0 * integrate_region(a, all) - integrate_region(b, all)));
  CHECK(integrate_region(a, half) < integrate_region(a, all));
}

TEST_CASE("grid nodes outside the region are rejected") {
  GridPtr g = disk(1.0, 1.0 / 16);
  std::vector<Index> every(g->size());
  for (Index n = 0; n < Index(g->size()); ++n) every[n] = n;
  NodeSet box(g, std::move(every));
  CHECK_THROWS_AS(integrate_region(ScalarField(g, 1.0), box), Error);
}

TEST_CASE("coarea shell integral recovers the unit circle") {
  GridPtr g = disk(1.5, 1.0 / 128);
  ScalarField w = half_r2(g);
  ScalarField one(g, 1.0);
  CHECK(level_surface_integral(one, w, 0.5).value == doctest::Approx(2 * pi).epsilon(0.03));
  CHECK(level_surface_integral(ScalarField(g, 0.0), w, 0.5).value == 0.0);
  // |∇w| = 1 on the circle, so 1/|∇w| integrates to the same length.
  ScalarField inv = ScalarField::sample(g, [](const Point& x) { return 1.0 / std::hypot(x[0], x[1]); });
  CHECK(level_surface_integral(inv, w, 0.5).value == doctest::Approx(2 * pi).epsilon(0.03));
}

TEST_CASE("coarea integral of 1/|grad| matches the derivative of the sublevel area") {
  GridPtr g = disk(1.5, 1.0 / 128);
  ScalarField w = half_r2(g);
  ScalarField one(g, 1.0);
  ScalarField inv = ScalarField::sample(g, [](const Point& x) { return 1.0 / std::hypot(x[0], x[1]); });
  auto area = [&](double t) {
    NodeSet s = NodeSet::from_predicate(g, [&](Index n) { return g->inside(n) && w[n] < t; });
    return integrate_region(one, s);
  };
  const double t = 0.5, dt = 0.05;
  const double derivative = (area(t + dt) - area(t - dt)) / (2 * dt);
  CHECK(level_surface_integral(inv, w, t).value == doctest::Approx(derivative).epsilon(0.05));
}

TEST_CASE("shell width follows the gradient on the crossing edges") {
  GridPtr g = disk(1.5, 1.0 / 64);
  SurfaceIntegral s = level_surface_integral(ScalarField(g, 1.0), half_r2(g), 0.5);
  CHECK(s.shell_width >= 2 * g->h() * 1.0);
  CHECK(s.shell_width <= 4 * g->h() * 1.1);
  CHECK(s.shell_nodes > 0);
}

TEST_CASE("empty level set is degenerate") {
  GridPtr g = disk(1.0, 1.0 / 32);
  CHECK_THROWS_AS(level_surface_integral(ScalarField(g, 1.0), half_r2(g), 5.0), Error);
}

TEST_CASE("disk area error shrinks under refinement") {
  double prev = 0.0;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    GridPtr g = disk(1.0, h);
    double err = std::abs(integrate_region(ScalarField(g, 1.0), NodeSet::inside(g)) - pi);
    if (prev > 0.0) CHECK(err < prev);
    prev = err;
  }
}
