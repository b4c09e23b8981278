#include "malab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "malab/error.hpp"
#include "toml.hpp"

namespace malab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  fail(ErrorKind::Configuration, "config field '" + field + "': " + msg);
}

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double norm(const Point& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

}  // namespace

AcceptanceConfig AcceptanceConfig::from_toml_string(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " (line " << e.source().begin.line << ")";
    fail(ErrorKind::Configuration, os.str());
  }
  AcceptanceConfig c;
  const std::map<std::string, double*> scalars = {
      {"ma_error_factor", &c.ma_error_factor},
      {"ma_order", &c.ma_order},
      {"ma_seconds", &c.ma_seconds},
      {"h_2d", &c.h_2d},
      {"h_3d", &c.h_3d},
      {"green_tol_2d", &c.green_tol_2d},
      {"green_tol_3d", &c.green_tol_3d},
      {"slope_tol", &c.slope_tol},
      {"fit_r2", &c.fit_r2},
      {"doubling_spread_radial", &c.doubling_spread_radial},
      {"doubling_spread_general", &c.doubling_spread_general},
      {"stock_v_height", &c.stock_v_height},
      {"green_mass_tol", &c.green_mass_tol},
      {"rho_tol", &c.rho_tol},
      {"boundary_flux_tol", &c.boundary_flux_tol},
      {"monotone_slack", &c.monotone_slack},
      {"lp_section_height", &c.lp_section_height},
      {"lp_tol", &c.lp_tol},
      {"cap_tol_2d", &c.cap_tol_2d},
      {"cap_tol_3d", &c.cap_tol_3d},
      {"cutoff_t", &c.cutoff_t},
      {"cutoff_tol", &c.cutoff_tol},
      {"cutoff_cap_tol", &c.cutoff_cap_tol},
      {"cutoff_ratio_max", &c.cutoff_ratio_max},
      {"reciprocity_tol", &c.reciprocity_tol},
      {"level_set_tol", &c.level_set_tol},
      {"decay_tol", &c.decay_tol},
      {"removable_R", &c.removable_R},
      {"removable_final", &c.removable_final},
      {"runtime_limit", &c.runtime_limit},
  };
  const std::map<std::string, std::vector<double>*> lists = {
      {"ma_h_2d", &c.ma_h_2d},
      {"ma_h_3d", &c.ma_h_3d},
      {"heights_3d", &c.heights_3d},
      {"doubling_heights_2d", &c.doubling_heights_2d},
      {"doubling_heights_3d", &c.doubling_heights_3d},
      {"stock_h", &c.stock_h},
      {"stock_heights", &c.stock_heights},
      {"stock_flux_heights", &c.stock_flux_heights},
      {"lp_h", &c.lp_h},
      {"cutoff_heights_3d", &c.cutoff_heights_3d},
      {"reciprocity_heights_2d", &c.reciprocity_heights_2d},
      {"reciprocity_heights_3d", &c.reciprocity_heights_3d},
      {"decay_levels", &c.decay_levels},
      {"removable_r", &c.removable_r},
  };
  for (auto&& [k, node] : tbl) {
    const std::string key(k.str());
    if (auto it = scalars.find(key); it != scalars.end()) {
      auto v = node.value<double>();
      if (!v) bad(key, "expected a number");
      *it->second = *v;
    } else if (auto jt = lists.find(key); jt != lists.end()) {
      const toml::array* a = node.as_array();
      if (!a || a->empty()) bad(key, "expected a nonempty array of numbers");
      jt->second->clear();
      for (std::size_t i = 0; i < a->size(); ++i) {
        auto v = a->get(i)->value<double>();
        if (!v) bad(key, "expected numbers");
        jt->second->push_back(*v);
      }
    } else if (key == "min_fit_points") {
      auto v = node.value<std::int64_t>();
      if (!v || *v < 4) bad(key, "expected an integer of at least 4");
      c.min_fit_points = int(*v);
    } else if (key == "seed") {
      auto v = node.value<std::int64_t>();
      if (!v || *v < 0) bad(key, "expected a nonnegative integer");
      c.seed = std::uint64_t(*v);
    } else if (key == "output") {
      auto v = node.value<std::string>();
      if (!v || v->empty()) bad(key, "expected a path");
      c.output = *v;
    } else {
      bad(key, "unknown field");
    }
  }
  for (auto* hs : {&c.ma_h_2d, &c.ma_h_3d, &c.stock_h, &c.lp_h}) {
    if (hs->size() < 3) bad("h lists", "refinement studies need three grid spacings");
    for (std::size_t i = 1; i < hs->size(); ++i)
      if (!((*hs)[i] < (*hs)[i - 1])) bad("h lists", "grid spacings must be strictly decreasing");
  }
  return c;
}

AcceptanceConfig AcceptanceConfig::from_toml_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::Configuration, "cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_toml_string(ss.str());
}

bool AcceptanceReport::all_pass() const {
  for (const CriterionResult& c : criteria)
    if (!c.pass) return false;
  return !criteria.empty();
}

namespace {

// Closed-form u = |x|²/2 on a ball with V a smaller concentric ball.
struct RadialFixture {
  std::unique_ptr<PotentialState> state;
  std::unique_ptr<SectionFamily> family;
  std::unique_ptr<LinearizedOperator> op;
  GreenFunction g;
};

RadialFixture radial(int dim, double h, double omega, double v) {
  RadialFixture f;
  GridPtr grid = Grid::build(ConvexDomain::ball(dim, omega), h);
  f.state = std::make_unique<PotentialState>(potential_from_function(
      grid, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }, DensitySpec{}));
  f.family = std::make_unique<SectionFamily>(*f.state, Point{});
  f.op = std::make_unique<LinearizedOperator>(*f.state, Region::of_domain(grid, ConvexDomain::ball(dim, v)));
  f.g = GreenSolver(*f.op).solve(f.family->center_node());
  return f;
}

double exact_green(int dim, double r, double R) {
  return dim == 2 ? std::log(R / r) / (2.0 * kPi) : (1.0 / r - 1.0 / R) / (4.0 * kPi);
}

ExperimentConfig stock_config(const AcceptanceConfig& a, int which) {
  ExperimentConfig c;
  static const char* names[] = {"stock-uniform", "stock-oscillating", "stock-step"};
  c.name = names[which];
  c.domain = "disk:1.4142135623730951";
  if (which == 1) {
    c.density = "1+0.5*sin(4*x)*sin(4*y)";
    c.lambda = 0.5;
    c.Lambda = 1.5;
  } else if (which == 2) {
    c.density = "0.6+0.9*step(x,4*h)";
    c.lambda = 0.6;
    c.Lambda = 1.5;
  }
  c.h = a.stock_h;
  c.heights = a.stock_heights;
  c.flux_heights = a.stock_flux_heights;
  c.v_height = a.stock_v_height;
  c.suites = {"green", "identities"};
  c.output = (fs::path(a.output) / "stock").string();
  c.seed = a.seed;
  c.tol.green_mass = a.green_mass_tol;
  c.tol.rho = a.rho_tol;
  c.tol.boundary_flux = a.boundary_flux_tol;
  c.tol.fit_r2 = a.fit_r2;
  c.tol.doubling_spread = a.doubling_spread_general;
  c.tol.monotone_slack = a.monotone_slack;
  return c;
}

const Check* find_check(const ExperimentResult& r, const std::string& name) {
  for (const Check& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

class Runner {
 public:
  Runner(const AcceptanceConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out), root_(output_path(cfg.output)) {
    fs::create_directories(root_);
  }

  AcceptanceReport run() {
    const double t0 = now();
    criterion(1, "ma_solver_oracle", [&] { return ma_oracle(); });
    criterion(2, "green_oracle", [&] { return green_oracle(); });
    criterion(3, "fixed_density_exponents", [&] { return exponents(); });
    criterion(4, "doubling_ratio", [&] { return doubling(); });
    criterion(5, "gradient_integrability", [&] { return gradient_lp(); });
    criterion(6, "integral_identities", [&] { return identities(); });
    criterion(7, "capacity", [&] { return capacity_checks(); });
    criterion(8, "reciprocity", [&] { return reciprocity(); });
    criterion(9, "distribution_decay", [&] { return decay(); });
    criterion(10, "removable_singularity", [&] { return removable(); });
    criterion(11, "runtime_and_determinism", [&] { return runtime_determinism(t0); });
    report_.seconds = now() - t0;

    json j = json::array();
    std::ostringstream csv;
    csv << "id,name,pass,seconds,detail\n";
    for (const CriterionResult& c : report_.criteria) {
      j.push_back({{"id", c.id}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}, {"seconds", c.seconds}});
      csv << c.id << ',' << c.name << ',' << (c.pass ? "PASS" : "FAIL") << ',' << num(c.seconds) << ",\"" << c.detail
          << "\"\n";
    }
    write_text(root_ / "criteria.json", j.dump(2));
    write_text(root_ / "criteria.csv", csv.str());
    return report_;
  }

 private:
  struct Outcome {
    bool pass = false;
    std::string detail;
  };

  void criterion(int id, const std::string& name, const std::function<Outcome()>& fn) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    const double t0 = now();
    try {
      Outcome o = fn();
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = now() - t0;
    out_ << (r.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << r.detail << " (" << num(r.seconds)
         << " s)" << std::endl;
    report_.criteria.push_back(std::move(r));
  }

  RadialFixture& disk() {
    if (!disk_) disk_ = std::make_unique<RadialFixture>(radial(2, cfg_.h_2d, std::sqrt(2.0), 1.0));
    return *disk_;
  }
  RadialFixture& ball() {
    if (!ball_) ball_ = std::make_unique<RadialFixture>(radial(3, cfg_.h_3d, 1.1, 1.0));
    return *ball_;
  }
  const std::vector<SuiteResult>& stock() {
    if (stock_.empty())
      for (int k = 0; k < 3; ++k) stock_.push_back(run_suite(stock_config(cfg_, k)));
    return stock_;
  }

  Outcome ma_oracle() {
    bool pass = true;
    std::ostringstream d;
    json art;
    for (int dim : {2, 3}) {
      const std::vector<double>& hs = dim == 2 ? cfg_.ma_h_2d : cfg_.ma_h_3d;
      const double R = std::sqrt(2.0);
      // u = exp(|x|²/2) - e: det D²u = (1 + |x|²) exp(n|x|²/2).
      const std::string f = dim == 2 ? "(1+r^2)*exp(r^2)" : "(1+r^2)*exp(1.5*r^2)";
      const DensitySpec dens = DensitySpec::parse(f, 1.0, 3.0 * std::exp(double(dim)));
      std::vector<double> err;
      double worst_time = 0.0;
      for (double h : hs) {
        GridPtr grid = Grid::build(ConvexDomain::ball(dim, R), h);
        double t0 = now();
        PotentialState s = solve_monge_ampere(grid, dens);
        worst_time = std::max(worst_time, now() - t0);
        double e = 0.0;
        for (Index n : grid->inside_nodes()) {
          double r = norm(grid->position(n));
          e = std::max(e, std::abs(s.u[n] - (std::exp(0.5 * r * r) - std::exp(1.0))));
        }
        err.push_back(e);
      }
      const double hf = hs.back();
      GridPtr grid = Grid::build(ConvexDomain::ball(dim, R), hf);
      double t0 = now();
      PotentialState q = solve_monge_ampere(grid, DensitySpec{});
      worst_time = std::max(worst_time, now() - t0);
      double eq = 0.0;
      for (Index n : grid->inside_nodes()) {
        double r = norm(grid->position(n));
        eq = std::max(eq, std::abs(q.u[n] - 0.5 * (r * r - 2.0)));
      }
      std::vector<double> ord = observed_orders(hs, err);
      const double bound = cfg_.ma_error_factor * hf * hf;
      bool ok = err.back() <= bound && eq <= bound && ord.back() >= cfg_.ma_order && worst_time <= cfg_.ma_seconds;
      pass = pass && ok;
      d << dim << "D h=" << num(hf) << " err/h²=" << num(err.back() / (hf * hf)) << " quad err/h²=" << num(eq / (hf * hf))
        << " order=" << num(ord.back()) << " max solve " << num(worst_time) << " s; ";
      art[std::to_string(dim) + "d"] = {{"h", hs}, {"error", err}, {"orders", ord}, {"quadratic_error", eq}};
    }
    write_text(root_ / "ma_oracle.json", art.dump(2));
    return {pass, d.str()};
  }

  double green_error(RadialFixture& f, int dim, double lo, double hi) {
    const Grid& grid = f.state->g();
    double worst = 0.0;
    for (Index n : f.g.domain) {
      double r = norm(grid.position(n));
      if (r < lo || r > hi) continue;
      double ex = exact_green(dim, r, 1.0);
      worst = std::max(worst, std::abs(f.g.g[n] - ex) / ex);
    }
    return worst;
  }

  Outcome green_oracle() {
    double e2 = green_error(disk(), 2, 0.1, 0.9);
    double e3 = green_error(ball(), 3, 0.15, 0.85);
    bool pass = e2 <= cfg_.green_tol_2d && e3 <= cfg_.green_tol_3d;
    return {pass, "2D max rel err " + num(e2) + " (h=" + num(cfg_.h_2d) + "), 3D " + num(e3) + " (h=" + num(cfg_.h_3d) + ")"};
  }

  Outcome exponents() {
    RadialFixture& b = ball();
    FitReport fr = verify_bounds_fixed_density(b.g, *b.family, b.op->nodes(), cfg_.heights_3d);
    write_text(root_ / "fixed_density_3d.json", fr.to_json());
    bool pass = std::abs(fr.slope + 0.5) <= cfg_.slope_tol && int(fr.points.size()) >= cfg_.min_fit_points;
    std::ostringstream d;
    d << "3D slope " << num(fr.slope) << " over " << fr.points.size() << " heights; 2D R²:";
    const auto& runs = stock();
    for (const SuiteResult& s : runs) {
      double worst = 1.0;
      bool ok = true;
      for (const ExperimentResult& r : s.experiments) {
        const Check* c = find_check(r, "fixed_density_r2");
        ok = ok && c && c->pass;
        if (c) worst = std::min(worst, c->value);
      }
      pass = pass && ok;
      d << ' ' << num(worst);
    }
    return {pass, d.str()};
  }

  Outcome doubling() {
    RadialFixture& dk = disk();
    RadialFixture& b = ball();
    FitReport d2 = verify_bounds_doubling(dk.g, *dk.family, dk.op->nodes(), cfg_.doubling_heights_2d);
    FitReport d3 = verify_bounds_doubling(b.g, *b.family, b.op->nodes(), cfg_.doubling_heights_3d);
    write_text(root_ / "doubling_2d.json", d2.to_json());
    write_text(root_ / "doubling_3d.json", d3.to_json());
    double s2 = d2.extra["spread"], s3 = d3.extra["spread"];
    double osc = 0.0;
    bool osc_ok = true;
    for (const ExperimentResult& r : stock()[1].experiments) {
      const Check* c = find_check(r, "doubling_spread");
      osc_ok = osc_ok && c && c->pass;
      if (c) osc = std::max(osc, c->value);
    }
    bool pass = s2 <= cfg_.doubling_spread_radial && s3 <= cfg_.doubling_spread_radial && osc_ok;
    return {pass, "radial spread 2D " + num(s2) + ", 3D " + num(s3) + " (resolution floor " +
                      num(d3.extra["resolution_floor"]) + "); oscillating density " + num(osc)};
  }

  Outcome gradient_lp() {
    const std::vector<double> ps{1.5, 2.0, 2.5};
    std::vector<std::vector<double>> vals(ps.size());
    for (double h : cfg_.lp_h) {
      RadialFixture f = radial(2, h, std::sqrt(2.0), 1.0);
      Section s = f.family->section(cfg_.lp_section_height);
      for (std::size_t i = 0; i < ps.size(); ++i) vals[i].push_back(gradient_lp_integral(f.g, s, ps[i]));
    }
    std::ostringstream csv;
    csv.precision(12);
    csv << "p,h,integral\n";
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t k = 0; k < cfg_.lp_h.size(); ++k) csv << ps[i] << ',' << cfg_.lp_h[k] << ',' << vals[i][k] << '\n';
    write_text(root_ / "gradient_lp.csv", csv.str());

    const std::size_t n = cfg_.lp_h.size();
    double stable = vals[0][n - 1] / vals[0][n - 2];
    double growth = vals[2][n - 1] / vals[2][n - 2];
    double expect = std::pow(cfg_.lp_h[n - 2] / cfg_.lp_h[n - 1], 2.5 - 2.0);
    double d1 = vals[1][n - 2] - vals[1][n - 3], d2 = vals[1][n - 1] - vals[1][n - 2];
    double steps = std::log(cfg_.lp_h[n - 2] / cfg_.lp_h[n - 1]) / std::log(cfg_.lp_h[n - 3] / cfg_.lp_h[n - 2]);
    double inc = d2 / (d1 * steps);
    bool pass = std::abs(stable - 1.0) <= cfg_.lp_tol && std::abs(growth / expect - 1.0) <= cfg_.lp_tol && d1 > 0.0 &&
                d2 > 0.0 && inc >= 1.0 - 2.0 * cfg_.lp_tol && inc <= 1.0 / (1.0 - 2.0 * cfg_.lp_tol);
    return {pass, "p=1.5 ratio " + num(stable) + ", p=2.5 ratio " + num(growth) + " (expected " + num(expect) +
                      "), p=2 increments " + num(d1) + ", " + num(d2)};
  }

  Outcome identities() {
    bool pass = true;
    std::ostringstream d;
    for (const SuiteResult& s : stock()) {
      std::map<std::string, std::vector<double>> series;
      bool ok = true;
      for (const ExperimentResult& r : s.experiments) {
        ok = ok && r.error.empty();
        for (const char* name : {"green_mass", "rho_unit_mass", "boundary_flux"})
          for (const Check& c : r.checks)
            if (c.name == name) ok = ok && c.pass;
        for (const char* m : {"green_mass", "rho", "boundary_flux"}) {
          auto it = r.metrics.find(m);
          series[m].push_back(it == r.metrics.end() ? NAN : it->second);
        }
      }
      for (const auto& [m, v] : series) {
        bool mono = nonincreasing(v, cfg_.monotone_slack);
        ok = ok && mono;
        for (double x : v) ok = ok && std::isfinite(x);
      }
      pass = pass && ok;
      const auto& last = s.experiments.back().metrics;
      auto get = [&](const char* k) { auto it = last.find(k); return it == last.end() ? NAN : it->second; };
      d << (ok ? "" : "[fail] ") << "mass " << num(get("green_mass")) << " rho " << num(get("rho")) << " flux "
        << num(get("boundary_flux")) << "; ";
    }
    return {pass, d.str() + "errors at finest h, nonincreasing under refinement"};
  }

  Outcome capacity_checks() {
    std::ostringstream d;
    json art;
    bool pass = true;
    for (int dim : {2, 3}) {
      RadialFixture& f = dim == 2 ? disk() : ball();
      Region V = Region::of_domain(f.state->grid, ConvexDomain::ball(dim, 0.8));
      CapacityResult c = sublevel_capacity(*f.state, V, f.family->height(), 0.02, cfg_.seed);
      double exact = dim == 2 ? 2.0 * kPi / std::log(4.0) : 4.0 * kPi / 3.75;
      double err = std::abs(c.value / exact - 1.0);
      bool ok = err <= (dim == 2 ? cfg_.cap_tol_2d : cfg_.cap_tol_3d) && c.min_perturbation_gain >= 0.0;
      pass = pass && ok;
      d << dim << "D annulus cap " << num(c.value) << " vs " << num(exact) << "; ";
      art[std::to_string(dim) + "d_annulus"] = json::parse(capacity_json(c, {}));
    }
    CutoffReport c2 = cutoff_energy_2d(*disk().family, cfg_.cutoff_t);
    double target = 8.0 * kPi / std::abs(std::log(cfg_.cutoff_t));
    double e_bound = std::abs(c2.bound / target - 1.0);
    double e_cap = std::abs(c2.capacity / c2.bound - 1.0);
    bool ok2 = e_bound <= cfg_.cutoff_tol && e_cap <= cfg_.cutoff_cap_tol && c2.energy >= c2.capacity * (1.0 - 1e-9);
    pass = pass && ok2;
    d << "2D cutoff bound " << num(c2.bound) << " vs " << num(target) << ", cap " << num(c2.capacity) << "; 3D energy/cap";
    art["cutoff_2d"] = {{"t", c2.t}, {"energy", c2.energy}, {"capacity", c2.capacity}, {"bound", c2.bound}};
    for (double t : cfg_.cutoff_heights_3d) {
      CutoffReport c3 = cutoff_energy_3d(*ball().op, *ball().family, t);
      double ratio = c3.energy / c3.capacity;
      pass = pass && ratio >= 1.0 && ratio <= cfg_.cutoff_ratio_max;
      d << ' ' << num(ratio);
      art["cutoff_3d"].push_back({{"t", t}, {"energy", c3.energy}, {"capacity", c3.capacity}, {"bound", c3.bound}});
    }
    write_text(root_ / "capacity.json", art.dump(2));
    return {pass, d.str()};
  }

  Outcome reciprocity() {
    std::ostringstream d;
    json art;
    bool pass = true;
    for (int dim : {2, 3}) {
      RadialFixture& f = dim == 2 ? disk() : ball();
      auto rows = reciprocity_check(*f.op, *f.family, f.g,
                                    dim == 2 ? cfg_.reciprocity_heights_2d : cfg_.reciprocity_heights_3d);
      double lo = 0.0, hi = 1e300;
      for (const ReciprocityRow& r : rows) {
        lo = std::max(lo, r.lo);
        hi = std::min(hi, r.hi);
        art[std::to_string(dim) + "d"].push_back({{"t", r.t}, {"lo", r.lo}, {"hi", r.hi}, {"cap", r.cap}});
      }
      pass = pass && lo <= 1.0 + cfg_.reciprocity_tol && hi >= 1.0 - cfg_.reciprocity_tol;
      d << dim << "D max lo " << num(lo) << " min hi " << num(hi) << "; ";
    }
    // Level sets of the radial g: J_a = {|x| <= ρ} for a = g(ρ).
    d << "level-set products";
    for (int dim : {2, 3}) {
      RadialFixture& f = dim == 2 ? disk() : ball();
      for (double rho : {0.25, 0.5}) {
        LevelSetCapacity l = level_set_capacity(f.g, exact_green(dim, rho, 1.0), *f.op);
        if (l.resolved) pass = pass && std::abs(l.product - 1.0) <= cfg_.level_set_tol;
        d << ' ' << num(l.product) << (l.resolved ? "" : "(unresolved)");
        art["level_set"].push_back({{"dim", dim}, {"a", l.a}, {"product", l.product}, {"resolved", l.resolved}});
      }
    }
    write_text(root_ / "reciprocity.json", art.dump(2));
    return {pass, d.str()};
  }

  Outcome decay() {
    FitReport fr = distribution_decay(ball().g, *ball().state, cfg_.decay_levels);
    write_text(root_ / "decay.json", fr.to_json());
    bool pass = std::abs(fr.slope + 3.0) <= cfg_.decay_tol;
    return {pass, "slope " + num(fr.slope) + " (offset " + num(fr.extra["offset"]) + ", raw " +
                      num(fr.extra["raw_slope"]) + "), R² " + num(fr.r2)};
  }

  Outcome removable() {
    RemovableDemoConfig dc;
    dc.R = cfg_.removable_R;
    dc.r_list = cfg_.removable_r;
    dc.inner = InnerData::Compliant;
    RemovableDemoReport comp = removable_singularity_demo(*disk().state, dc);
    dc.inner = InnerData::Critical;
    RemovableDemoReport crit = removable_singularity_demo(*disk().state, dc);
    json art;
    art["compliant"] = {{"r", comp.r}, {"discrepancy", comp.discrepancy}};
    art["critical"] = {{"r", crit.r}, {"discrepancy", crit.discrepancy}};
    write_text(root_ / "removable.json", art.dump(2));
    const double last = comp.discrepancy.back();
    const bool control = crit.discrepancy.back() >= 0.5 * crit.discrepancy.front();
    bool pass = comp.decreasing && last <= cfg_.removable_final && control;
    std::ostringstream d;
    d << "compliant";
    for (double v : comp.discrepancy) d << ' ' << num(v);
    d << (comp.decreasing ? " (decreasing)" : " (not decreasing)") << ", final vs " << num(cfg_.removable_final)
      << "; critical control";
    for (double v : crit.discrepancy) d << ' ' << num(v);
    return {pass, d.str()};
  }

  Outcome runtime_determinism(double t0) {
    ExperimentConfig c = stock_config(cfg_, 1);
    c.h = {cfg_.stock_h[0], cfg_.stock_h[1]};
    c.name = "determinism-a";
    c.workers = 1;
    SuiteResult a = run_suite(c);
    c.name = "determinism-b";
    c.workers = 2;
    SuiteResult b = run_suite(c);
    auto strip = [](std::string s, const std::string& name) {
      auto p = s.find(name);
      if (p != std::string::npos) s.replace(p, name.size(), "");
      return s;
    };
    bool same = strip(a.summary_json, "determinism-a") == strip(b.summary_json, "determinism-b");
    const double elapsed = now() - t0;
    bool fast = elapsed <= cfg_.runtime_limit;
    return {same && fast, "suite time " + num(elapsed) + " s (limit " + num(cfg_.runtime_limit) +
                              "), summary identical across reruns: " + (same ? "yes" : "no")};
  }

  const AcceptanceConfig& cfg_;
  std::ostream& out_;
  fs::path root_;
  AcceptanceReport report_;
  std::unique_ptr<RadialFixture> disk_, ball_;
  std::vector<SuiteResult> stock_;
};

}  // namespace

AcceptanceReport run_acceptance(const AcceptanceConfig& cfg, std::ostream& out) { return Runner(cfg, out).run(); }

}  // namespace malab
