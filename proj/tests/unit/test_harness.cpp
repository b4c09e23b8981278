#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "malab/acceptance.hpp"

using namespace malab;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Misuse;
}

const char* kSmall = R"(
name = "small"
domain = "disk:1.4142135623730951"
potential = "(x^2 + y^2 - 2)/2"
h = [0.0625, 0.03125, 0.015625]
heights = [0.005, 0.01, 0.02, 0.04, 0.08]
flux_heights = [0.18, 0.24]
suites = ["sections", "green", "identities"]
output = "harness"

[density]
expr = "1"
)";

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("experiment config parses tables and rejects unknown fields") {
  ExperimentConfig c = ExperimentConfig::from_toml_string(kSmall);
  CHECK(c.name == "small");
  CHECK(c.h.size() == 3);
  CHECK(c.suites.count("green") == 1);
  CHECK(c.dim() == 2);
  CHECK_NOTHROW(c.validate());

  CHECK(kind_of([] { ExperimentConfig::from_toml_string("bogus = 1\nh = [0.1]\nheights = [0.1]"); }) ==
        ErrorKind::Configuration);
  try {
    ExperimentConfig::from_toml_string("h = [0.1]\nheights = [0.1]\n[tolerances]\nnope = 0.1");
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }
  CHECK(kind_of([] { ExperimentConfig::from_toml_string("h = \"fine\""); }) == ErrorKind::Configuration);
  CHECK(kind_of([] { ExperimentConfig::from_toml_string("h = [0.1"); }) == ErrorKind::Configuration);
}

TEST_CASE("validation catches empty heights, unsorted h and unknown suites") {
  ExperimentConfig c = ExperimentConfig::from_toml_string(kSmall);
  c.heights.clear();
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Configuration);
  c = ExperimentConfig::from_toml_string(kSmall);
  c.h = {0.01, 0.02};
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Configuration);
  c = ExperimentConfig::from_toml_string(kSmall);
  c.suites.insert("nonsense");
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Configuration);
  c = ExperimentConfig::from_toml_string(kSmall);
  c.suites.insert("decay");
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::Configuration);
  CHECK(exit_code_for(ErrorKind::Configuration) == 2);
}

TEST_CASE("tolerances override by name only") {
  Tolerances t = Tolerances::from_map({{"rho", 0.1}});
  CHECK(t.rho == 0.1);
  CHECK(t.green_mass == 0.03);
  CHECK_THROWS_AS(Tolerances::from_map({{"rhoo", 0.1}}), Error);
}

TEST_CASE("output paths resolve against the output root") {
  const char* root = std::getenv("MALAB_OUTPUT_ROOT");
  if (root && *root) CHECK(output_path("a/b") == fs::path(root) / "a/b");
  CHECK(output_path("/abs/x") == fs::path("/abs/x"));
}

TEST_CASE("point and region specs") {
  Point p = parse_point("0.5,-1");
  CHECK(p[0] == 0.5);
  CHECK(p[1] == -1.0);
  CHECK(parse_point("1,2,3")[2] == 3.0);
  CHECK_THROWS_AS(parse_point("1"), Error);
  CHECK_THROWS_AS(parse_point("1,a"), Error);

  PotentialState st = fixtures::paraboloid(2, 1.0, 1.0 / 32);
  SectionFamily fam(st, Point{});
  CHECK(parse_region("section:0.1", st, fam).nodes.size() == fam.section(0.1).nodes.size());
  CHECK(parse_region("disk:0.5", st, fam).nodes.size() > 0);
  CHECK(kind_of([&] { parse_region("section:0.49", st, fam); }) == ErrorKind::NotContained);
}

TEST_CASE("nonincreasing allows the slack") {
  CHECK(nonincreasing({0.3, 0.2, 0.1}, 0.0));
  CHECK(nonincreasing({0.3, 0.3005, 0.1}, 1e-3));
  CHECK_FALSE(nonincreasing({0.1, 0.2}, 1e-3));
}

TEST_CASE("suite run writes artifacts and a reproducible summary") {
  ExperimentConfig c = ExperimentConfig::from_toml_string(kSmall);
  SuiteResult a = run_suite(c);
  CHECK(a.experiments.size() == 3);
  const fs::path root = output_path(c.output) / c.name;
  CHECK(fs::exists(root / "summary.json"));
  CHECK(fs::exists(root / "sweep.csv"));
  CHECK(fs::exists(root / "h0" / "x0" / "sections.csv"));
  CHECK(fs::exists(root / "h2" / "x0" / "identities.csv"));
  const std::string first = slurp(root / "summary.json");
  auto j = nlohmann::json::parse(first);
  CHECK(j.contains("experiments"));

  c.workers = 2;
  SuiteResult b = run_suite(c);
  CHECK(slurp(root / "summary.json") == first);
  CHECK(a.exit_code == b.exit_code);

  std::istringstream csv(slurp(root / "h2" / "x0" / "identities.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "name,h,left,right,rel_err,pass");
  std::istringstream sec(slurp(root / "h0" / "x0" / "sections.csv"));
  std::getline(sec, header);
  CHECK(header == "t,volume,mu,com_x,com_y");
}

TEST_CASE("a failing solve is recorded with the solver exit code") {
  ExperimentConfig c = ExperimentConfig::from_toml_string(kSmall);
  c.name = "failing";
  c.potential.clear();
  c.density = "1 + 0.5*sin(4*x)*sin(4*y)";
  c.lambda = 0.5;
  c.Lambda = 1.5;
  c.max_newton = 1;
  c.solver_tol = 1e-10;
  c.h = {0.0625};
  SuiteResult r = run_suite(c);
  CHECK(r.exit_code == 3);
  CHECK_FALSE(r.experiments.front().error.empty());
}

TEST_CASE("capacity JSON carries the four fields") {
  CapacityResult c;
  c.value = 2.0;
  c.flux = 2.1;
  auto j = nlohmann::json::parse(capacity_json(c, {}));
  CHECK(j["cap"] == 2.1);
  CHECK(j["q_form"] == 2.0);
  CHECK(j["sandwich_lo"].is_null());
  CHECK(j["sandwich_hi"].is_null());
  ReciprocityRow r{0.1, 0.4, 0.6, 2.0, 0.8, 1.2};
  j = nlohmann::json::parse(capacity_json(c, {r}));
  CHECK(j["sandwich_lo"] == 0.8);
  CHECK(j["sandwich_hi"] == 1.2);
}

TEST_CASE("acceptance config rejects unknown keys") {
  AcceptanceConfig a = AcceptanceConfig::from_toml_string("h_3d = 0.0625\nstock_h = [0.0625, 0.03125, 0.015625]");
  CHECK(a.h_3d == 0.0625);
  CHECK(a.stock_h.size() == 3);
  CHECK_THROWS_AS(AcceptanceConfig::from_toml_string("h_4d = 1"), Error);
}
