#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "malab/field_io.hpp"

using namespace malab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = output_path("unit-io") / name;
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("line fit recovers an exact line") {
  LineFit f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), Error);
}

TEST_CASE("power fit recovers the exponent") {
  std::vector<std::pair<double, double>> pts;
  for (double t : {0.01, 0.02, 0.04, 0.08}) pts.emplace_back(t, 3.0 * std::pow(t, -0.5));
  FitReport r = fit_report("power", pts);
  CHECK(r.slope == doctest::Approx(-0.5));
  CHECK(std::exp(r.intercept) == doctest::Approx(3.0));
  auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["model"] == "power");
  CHECK(j["points"].size() == 4);
  for (const char* k : {"slope", "intercept", "r2"}) CHECK(j.contains(k));
  CHECK_THROWS_AS(fit_report("power", {{1, 1}, {2, 2}, {3, 3}}), Error);
  CHECK_THROWS_AS(fit_report("power", {{1, 1}, {2, -2}, {3, 3}, {4, 4}}), Error);
}

TEST_CASE("observed orders of a second-order error") {
  std::vector<double> o = observed_orders({0.1, 0.05, 0.025}, {0.01, 0.0025, 0.000625});
  REQUIRE(o.size() == 2);
  CHECK(o[0] == doctest::Approx(2.0));
  CHECK(o[1] == doctest::Approx(2.0));
}

TEST_CASE("binary field container round-trips values and metadata") {
  GridPtr g = Grid::build(ConvexDomain::parse("ellipse:1,0.7"), 1.0 / 16);
  ScalarField f = ScalarField::sample(g, [](const Point& x) { return std::sin(x[0]) + x[1]; });
  fs::path p = scratch("field.bin");
  write_field(p, f, R"({"label":"test"})");
  FieldFile back = read_field(p);
  CHECK(back.grid->size() == g->size());
  CHECK(back.grid->h() == g->h());
  CHECK(nlohmann::json::parse(back.metadata)["label"] == "test");
  for (Index n = 0; n < Index(g->size()); ++n) {
    if (f.defined(n)) CHECK(back.values[n] == f[n]);
    else CHECK_FALSE(back.values.defined(n));
  }
  CHECK(slurp(p).substr(0, 8) == "MALABFLD");
}

TEST_CASE("potential state round-trips through the state file") {
  PotentialState st = fixtures::paraboloid(2, 1.0, 1.0 / 16);
  fs::path p = scratch("state.bin");
  write_state(p, st);
  PotentialState back = read_state(p);
  CHECK(back.dim() == 2);
  for (Index n : st.g().inside_nodes()) CHECK(back.u[n] == doctest::Approx(st.u[n]));
  CHECK(back.density.lambda() == st.density.lambda());
}

TEST_CASE("field CSV has one row per defined inside node") {
  PotentialState st = fixtures::paraboloid(3, 1.0, 1.0 / 8);
  fs::path p = scratch("u.csv");
  write_field_csv(p, st.u);
  std::istringstream is(slurp(p));
  std::string header, line;
  std::getline(is, header);
  CHECK(header == "x,y,z,value");
  std::size_t rows = 0;
  while (std::getline(is, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == st.g().inside_nodes().size());
}

TEST_CASE("unreadable files are IO errors") {
  try {
    read_field(scratch("missing.bin"));
    FAIL("expected an IO error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}
