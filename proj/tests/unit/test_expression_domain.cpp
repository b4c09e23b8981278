#include <doctest.h>

#include "fixtures.hpp"
#include "malab/expression.hpp"

using namespace malab;
using fixtures::pi;

TEST_CASE("expressions evaluate arithmetic, functions and variables") {
  CHECK(Expression::parse("1 + 2*3")({}) == 7.0);
  CHECK(Expression::parse("2^3^2")({}) == 512.0);
  CHECK(Expression::parse("-x^2")({.x = 3.0}) == -9.0);
  CHECK(Expression::parse("sin(pi/2) + exp(0) + sqrt(16)")({}) == doctest::Approx(6.0));
  CHECK(Expression::parse("r")({.x = 3.0, .y = 4.0}) == doctest::Approx(5.0));
  CHECK(Expression::parse("min(x, y) + max(x, z)")({.x = 1.0, .y = 2.0, .z = 5.0}) == 6.0);
  CHECK(Expression::parse("4*h")({.h = 0.25}) == 1.0);
}

TEST_CASE("step ramps from 0 to 1 across its width") {
  Expression e = Expression::parse("step(x, 0.1)");
  CHECK(e({.x = -1.0}) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(e({.x = 0.0}) == doctest::Approx(0.5));
  CHECK(e({.x = 1.0}) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("malformed expressions are configuration errors") {
  for (const char* bad : {"1 +", "sin(", "foo(1)", "q", "1 2", ""}) {
    INFO(bad);
    CHECK_THROWS_AS(Expression::parse(bad), Error);
  }
}

TEST_CASE("domain specs parse and round-trip") {
  ConvexDomain d = ConvexDomain::parse("ellipse:1,0.5");
  CHECK(d.dim() == 2);
  CHECK(d.contains({0.9, 0.0, 0.0}));
  CHECK_FALSE(d.contains({0.0, 0.6, 0.0}));
  CHECK(ConvexDomain::parse(d.spec()).spec() == d.spec());
  CHECK(ConvexDomain::parse("ball:2").dim() == 3);
  CHECK(ConvexDomain::parse("disk:1@0.5,0").contains({1.4, 0.0, 0.0}));
  CHECK_THROWS_AS(ConvexDomain::parse("square:1"), Error);
  CHECK_THROWS_AS(ConvexDomain::parse("disk:-1"), Error);
  CHECK_THROWS_AS(ConvexDomain::parse("disk"), Error);
}

TEST_CASE("too coarse a grid is rejected") {
  CHECK_THROWS_AS(Grid::build(ConvexDomain::parse("disk:1"), 0.5), Error);
}

TEST_CASE("inside node counts match direct enumeration") {
  const double h = 1.0 / 64;
  auto count = [&](double a, double b) {
    std::size_t n = 0;
    for (int i = -200; i <= 200; ++i)
      for (int j = -200; j <= 200; ++j) {
        const double x = i * h, y = j * h;
        n += (x * x) / (a * a) + (y * y) / (b * b) < 1.0 ? 1 : 0;
      }
    return n;
  };
  GridPtr disk = Grid::build(ConvexDomain::parse("disk:1"), h);
  CHECK(disk->inside_nodes().size() == count(1.0, 1.0));
  CHECK(double(disk->inside_nodes().size()) == doctest::Approx(pi / (h * h)).epsilon(0.02));
  GridPtr ell = Grid::build(ConvexDomain::parse("ellipse:1,0.5"), h);
  CHECK(ell->inside_nodes().size() == count(1.0, 0.5));
  CHECK(double(ell->inside_nodes().size()) == doctest::Approx(pi * 0.5 / (h * h)).epsilon(0.02));
}

TEST_CASE("boundary-adjacent nodes are inside nodes with an exterior axis neighbour") {
  GridPtr g = Grid::build(ConvexDomain::parse("disk:1"), 1.0 / 16);
  for (Index n : g->inside_nodes()) {
    bool exterior_neighbour = false;
    for (const Offset& o : g->axis_offsets())
      for (int sign : {1, -1}) {
        Index m = g->neighbor(n, {sign * o[0], sign * o[1], sign * o[2]});
        exterior_neighbour = exterior_neighbour || !g->inside(m);
      }
    CHECK((g->kind(n) == NodeKind::BoundaryAdjacent) == exterior_neighbour);
  }
  Index c = g->nearest_node({0.01, -0.02, 0.0});
  CHECK(g->position(c)[0] == doctest::Approx(0.0));
  CHECK(g->position(c)[1] == doctest::Approx(0.0));
}
