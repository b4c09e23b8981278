#include <doctest.h>

#include "fixtures.hpp"

using namespace malab;
using fixtures::pi;

TEST_CASE("paraboloid sections are disks about the touching point") {
  PotentialState st = fixtures::paraboloid(2, 1.4142135623730951, 1.0 / 128);
  Section s = build_section(st, {0, 0, 0}, 0.18);
  CHECK(s.volume == doctest::Approx(pi * 0.36).epsilon(0.03));
  CHECK(std::abs(s.com[0]) <= st.g().h());
  CHECK(std::abs(s.com[1]) <= st.g().h());
  CHECK(s.volume == doctest::Approx(st.g().cell_volume() * s.nodes.size()));
  CHECK(s.nodes.contains(s.center_node));
  CHECK(grid_convex(s.nodes));

  Section off = build_section(st, {0.2, 0, 0}, 0.02);
  CHECK(off.volume == doctest::Approx(pi * 0.04).epsilon(0.05));
  CHECK(off.com[0] == doctest::Approx(0.2).epsilon(0.05));
  // The center snaps to the nearest node.
  for (Index n : off.nodes) {
    Point x = st.g().position(n);
    CHECK(std::hypot(x[0] - off.x0[0], x[1] - off.x0[1]) < 0.2 + 1e-12);
  }
}

TEST_CASE("sections reaching the boundary or with nonpositive height are rejected") {
  PotentialState st = fixtures::paraboloid(2, 1.0, 1.0 / 32);
  SectionFamily fam(st, {0, 0, 0});
  try {
    fam.section(0.49);
    FAIL("expected not-compactly-contained");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotContained);
  }
  CHECK_THROWS_AS(fam.section(0.0), Error);
  CHECK_THROWS_AS(fam.section(-1.0), Error);
  CHECK(fam.max_height() < 0.5);
}

TEST_CASE("sections are nested and their measure grows with height") {
  PotentialState st = fixtures::closed("disk:1.4142135623730951", "(x^2 + y^2 - 2)/2", 1.0 / 64);
  SectionFamily fam(st, {0.1, -0.05, 0});
  double prev = 0.0;
  Section last = fam.section(0.01);
  for (double t : {0.02, 0.04, 0.08, 0.16}) {
    Section s = fam.section(t);
    CHECK(last.nodes.subset_of(s.nodes));
    CHECK(s.mu > prev);
    CHECK(fam.measure(t) == doctest::Approx(s.mu));
    CHECK(fam.volume(t) == doctest::Approx(s.volume));
    prev = s.mu;
    last = s;
  }
}

TEST_CASE("dilation by one half quarters the area and keeps the centroid") {
  PotentialState st = fixtures::paraboloid(2, 1.4142135623730951, 1.0 / 128);
  Section s = build_section(st, {0, 0, 0}, 0.18);
  Section d = dilate_section(s, 0.5, st);
  CHECK(d.volume / s.volume == doctest::Approx(0.25).epsilon(0.05));
  CHECK(dilate_section(s, 1.0, st).nodes.size() == s.nodes.size());
  CHECK_THROWS_AS(dilate_section(s, 0.0, st), Error);
  CHECK_THROWS_AS(dilate_section(s, 1.5, st), Error);

  // Anisotropic paraboloid: the dilated ellipse keeps its axis ratio.
  PotentialState an = fixtures::closed("disk:1.4142135623730951", "(2*x^2 + y^2/2)/2 - 1", 1.0 / 128);
  Section e = build_section(an, {0, 0, 0}, 0.1);
  Section ed = dilate_section(e, 0.5, an);
  auto extent = [&](const Section& sec, int k) {
    double m = 0.0;
    for (Index n : sec.nodes) m = std::max(m, std::abs(an.g().position(n)[k]));
    return m;
  };
  CHECK(extent(ed, 1) / extent(ed, 0) == doctest::Approx(extent(e, 1) / extent(e, 0)).epsilon(0.1));
  CHECK(std::abs(ed.com[0] - e.com[0]) <= an.g().h());
  CHECK(std::abs(ed.com[1] - e.com[1]) <= an.g().h());
}

TEST_CASE("volume growth exponent is n/2") {
  PotentialState st2 = fixtures::paraboloid(2, 1.4142135623730951, 1.0 / 128);
  FitReport r2 = volume_growth_report(st2, {0, 0, 0}, {0.02, 0.04, 0.08, 0.16});
  CHECK(r2.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(r2.extra["ratio_min"] == doctest::Approx(2 * pi).epsilon(0.05));
  CHECK(r2.extra["ratio_max"] == doctest::Approx(2 * pi).epsilon(0.05));

  PotentialState st3 = fixtures::paraboloid(3, 1.4142135623730951, 1.0 / 32);
  FitReport r3 = volume_growth_report(st3, {0, 0, 0}, {0.02, 0.04, 0.08, 0.16});
  CHECK(std::abs(r3.slope - 1.5) <= 0.07);

  CHECK_THROWS_AS(volume_growth_report(st2, {0, 0, 0}, {0.02, 0.04, 0.08}), Error);
}

TEST_CASE("doubling constants of the flat measure") {
  PotentialState st = fixtures::paraboloid(2, 1.4142135623730951, 1.0 / 128);
  // μ(S(t)) / μ(½ S(t/2)) = 2πt / (¼ · πt) = 8.
  DoublingParams d = doubling_report(st, {0, 0, 0}, {0.04, 0.08, 0.16}, 0.5);
  CHECK(d.beta == doctest::Approx(8.0).epsilon(0.05));
  CHECK(d.beta_prime == doctest::Approx(2.0).epsilon(0.05));
  DoublingParams one = doubling_report(st, {0, 0, 0}, {0.04, 0.08, 0.16}, 1.0);
  CHECK(one.beta == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("sections of a unimodular image are preimages of sections") {
  // ũ(x) = u(Tx) with T = diag(2, 1/2) on the ellipse T⁻¹(disk).
  PotentialState u = fixtures::paraboloid(2, 1.0, 1.0 / 128);
  PotentialState ut = fixtures::closed("ellipse:0.5,2", "((2*x)^2 + (y/2)^2 - 1)/2", 1.0 / 128);
  for (double t : {0.02, 0.05, 0.1}) {
    CHECK(build_section(ut, {0, 0, 0}, t).volume == doctest::Approx(build_section(u, {0, 0, 0}, t).volume).epsilon(0.05));
  }
}

TEST_CASE("oscillating density keeps the volume ratio bounded") {
  ExperimentConfig c;
  c.density = "1 + 0.5*sin(4*x)*sin(4*y)";
  c.lambda = 0.5;
  c.Lambda = 1.5;
  PotentialState st = build_state(c, 1.0 / 64);
  FitReport r = volume_growth_report(st, {0, 0, 0}, {0.02, 0.04, 0.08, 0.16});
  CHECK(r.slope >= 0.9);
  CHECK(r.slope <= 1.1);
  CHECK(r.extra["ratio_max"] / r.extra["ratio_min"] < 2.0);
}
