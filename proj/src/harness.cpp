#include "malab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "malab/error.hpp"
#include "toml.hpp"

namespace malab {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path output_path(const fs::path& p) {
  if (p.is_absolute()) return p;
  const char* root = std::getenv("MALAB_OUTPUT_ROOT");
  if (root && *root) return fs::path(root) / p;
  return p;
}

Point parse_point(const std::string& text) {
  Point p{};
  std::stringstream ss(text);
  std::string item;
  int k = 0;
  while (std::getline(ss, item, ',')) {
    if (k >= 3) fail(ErrorKind::Configuration, "point '" + text + "' has more than three coordinates");
    try {
      p[k++] = std::stod(item);
    } catch (const std::exception&) {
      fail(ErrorKind::Configuration, "bad coordinate '" + item + "' in point '" + text + "'");
    }
  }
  if (k < 2) fail(ErrorKind::Configuration, "point '" + text + "' needs at least two coordinates");
  return p;
}

Region parse_region(const std::string& text, const PotentialState& st, const SectionFamily& fam) {
  if (text.rfind("section:", 0) == 0) {
    double t = 0.0;
    try {
      t = std::stod(text.substr(8));
    } catch (const std::exception&) {
      fail(ErrorKind::Configuration, "bad section height in '" + text + "'");
    }
    if (t > fam.max_height()) fail(ErrorKind::NotContained, "section " + text + " is not compactly inside the domain");
    return Region::sublevel(fam.height(), t);
  }
  ConvexDomain d = ConvexDomain::parse(text);
  return Region::of_domain(st.grid, d);
}

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  fail(ErrorKind::Configuration, "config field '" + field + "': " + msg);
}

double as_double(const toml::node& n, const std::string& field) {
  if (auto v = n.value<double>()) return *v;
  bad(field, "expected a number");
}

std::string as_string(const toml::node& n, const std::string& field) {
  if (auto v = n.value<std::string>()) return *v;
  bad(field, "expected a string");
}

std::vector<double> as_doubles(const toml::node& n, const std::string& field) {
  const toml::array* a = n.as_array();
  if (!a) bad(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < a->size(); ++i) out.push_back(as_double(*a->get(i), field + "[" + std::to_string(i) + "]"));
  return out;
}

Point as_point(const toml::node& n, const std::string& field) {
  std::vector<double> v = as_doubles(n, field);
  if (v.size() < 2 || v.size() > 3) bad(field, "a point has two or three coordinates");
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

ExperimentConfig from_table(const toml::table& tbl) {
  ExperimentConfig c;
  bool flux_given = false;
  for (auto&& [k, node] : tbl) {
    const std::string key(k.str());
    if (key == "name") {
      c.name = as_string(node, key);
    } else if (key == "domain") {
      c.domain = as_string(node, key);
    } else if (key == "potential") {
      c.potential = as_string(node, key);
    } else if (key == "exact") {
      c.exact = as_string(node, key);
    } else if (key == "h") {
      c.h = as_doubles(node, key);
    } else if (key == "heights") {
      c.heights = as_doubles(node, key);
    } else if (key == "flux_heights") {
      c.flux_heights = as_doubles(node, key);
      flux_given = true;
    } else if (key == "levels") {
      c.levels = as_doubles(node, key);
    } else if (key == "v_height") {
      c.v_height = as_double(node, key);
    } else if (key == "trace_height") {
      c.trace_height = as_double(node, key);
    } else if (key == "output") {
      c.output = as_string(node, key);
    } else if (key == "seed") {
      auto v = node.value<std::int64_t>();
      if (!v || *v < 0) bad(key, "expected a nonnegative integer");
      c.seed = std::uint64_t(*v);
    } else if (key == "workers") {
      auto v = node.value<std::int64_t>();
      if (!v) bad(key, "expected an integer");
      c.workers = int(*v);
    } else if (key == "poles") {
      const toml::array* a = node.as_array();
      if (!a) bad(key, "expected an array of points");
      c.poles.clear();
      for (std::size_t i = 0; i < a->size(); ++i) c.poles.push_back(as_point(*a->get(i), key + "[" + std::to_string(i) + "]"));
    } else if (key == "suites") {
      const toml::array* a = node.as_array();
      if (!a) bad(key, "expected an array of suite names");
      c.suites.clear();
      for (std::size_t i = 0; i < a->size(); ++i) c.suites.insert(as_string(*a->get(i), key));
    } else if (key == "density") {
      const toml::table* d = node.as_table();
      if (!d) bad(key, "expected a table with expr, lambda, Lambda");
      for (auto&& [dk, dn] : *d) {
        const std::string sub = "density." + std::string(dk.str());
        if (dk.str() == "expr") c.density = as_string(dn, sub);
        else if (dk.str() == "lambda") c.lambda = as_double(dn, sub);
        else if (dk.str() == "Lambda") c.Lambda = as_double(dn, sub);
        else bad(sub, "unknown field");
      }
    } else if (key == "solver") {
      const toml::table* d = node.as_table();
      if (!d) bad(key, "expected a table");
      for (auto&& [dk, dn] : *d) {
        const std::string sub = "solver." + std::string(dk.str());
        if (dk.str() == "tol") {
          c.solver_tol = as_double(dn, sub);
        } else if (dk.str() == "max_newton") {
          auto v = dn.value<std::int64_t>();
          if (!v) bad(sub, "expected an integer");
          c.max_newton = int(*v);
        } else {
          bad(sub, "unknown field");
        }
      }
    } else if (key == "tolerances") {
      const toml::table* d = node.as_table();
      if (!d) bad(key, "expected a table");
      std::map<std::string, double> vals;
      for (auto&& [dk, dn] : *d) vals[std::string(dk.str())] = as_double(dn, "tolerances." + std::string(dk.str()));
      c.tol = Tolerances::from_map(vals);
    } else {
      bad(key, "unknown field");
    }
  }
  if (!flux_given) c.flux_heights = c.heights;
  return c;
}

void check_list(const std::vector<double>& v, const std::string& field, bool nonempty) {
  if (nonempty && v.empty()) bad(field, "list is empty");
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x)) bad(field, "entries must be positive");
}

}  // namespace

Tolerances Tolerances::from_map(const std::map<std::string, double>& values) {
  Tolerances t;
  const std::map<std::string, double Tolerances::*> fields = {
      {"green_mass", &Tolerances::green_mass},   {"rho", &Tolerances::rho},
      {"boundary_flux", &Tolerances::boundary_flux}, {"trace", &Tolerances::trace},
      {"fit_r2", &Tolerances::fit_r2},           {"slope", &Tolerances::slope},
      {"doubling_spread", &Tolerances::doubling_spread}, {"reciprocity", &Tolerances::reciprocity},
      {"decay_slope", &Tolerances::decay_slope}, {"monotone_slack", &Tolerances::monotone_slack},
  };
  for (const auto& [k, v] : values) {
    auto it = fields.find(k);
    if (it == fields.end()) bad("tolerances." + k, "unknown tolerance");
    if (!(v >= 0.0)) bad("tolerances." + k, "must be nonnegative");
    t.*(it->second) = v;
  }
  return t;
}

ExperimentConfig ExperimentConfig::from_toml_string(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " (line " << e.source().begin.line << ")";
    fail(ErrorKind::Configuration, os.str());
  }
  return from_table(tbl);
}

ExperimentConfig ExperimentConfig::from_toml_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::Configuration, "cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return from_toml_string(ss.str());
}

const std::set<std::string>& known_suites() {
  static const std::set<std::string> s{"sections", "green", "capacity", "identities", "decay"};
  return s;
}

int ExperimentConfig::dim() const { return ConvexDomain::parse(domain).dim(); }

DensitySpec ExperimentConfig::density_spec() const { return DensitySpec::parse(density, lambda, Lambda); }

void ExperimentConfig::validate() const {
  if (name.empty() || name.find('/') != std::string::npos) bad("name", "must be a nonempty plain name");
  ConvexDomain dom;
  try {
    dom = ConvexDomain::parse(domain);
  } catch (const Error& e) {
    bad("domain", e.what());
  }
  try {
    Expression::parse(density);
  } catch (const Error& e) {
    bad("density.expr", e.what());
  }
  if (!(lambda > 0.0)) bad("density.lambda", "must be positive");
  if (!(Lambda >= lambda)) bad("density.Lambda", "must be at least lambda");
  for (const auto& [field, text] : {std::pair{"potential", potential}, std::pair{"exact", exact}}) {
    if (text.empty()) continue;
    try {
      Expression::parse(text);
    } catch (const Error& e) {
      bad(field, e.what());
    }
  }
  check_list(h, "h", true);
  for (std::size_t i = 1; i < h.size(); ++i)
    if (!(h[i] < h[i - 1])) bad("h", "list must be strictly decreasing");
  check_list(heights, "heights", true);
  check_list(flux_heights, "flux_heights", false);
  if (poles.empty()) bad("poles", "list is empty");
  for (const Point& p : poles)
    if (!dom.contains(p)) bad("poles", "pole outside the domain");
  if (!(v_height > 0.0)) bad("v_height", "must be positive");
  if (!(trace_height > 0.0)) bad("trace_height", "must be positive");
  if (suites.empty()) bad("suites", "no suite selected");
  for (const std::string& s : suites)
    if (!known_suites().count(s)) bad("suites", "unknown suite '" + s + "'");
  if (suites.count("decay")) {
    if (dom.dim() != 3) bad("suites", "decay runs in three dimensions only");
    check_list(levels, "levels", true);
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (!(levels[i] > levels[i - 1])) bad("levels", "list must be strictly increasing");
  }
  if (output.empty()) bad("output", "empty path");
  if (workers < 1) bad("workers", "must be at least 1");
  if (!(solver_tol >= 1e-10)) bad("solver.tol", "must be at least 1e-10");
  if (max_newton < 1) bad("solver.max_newton", "must be positive");
}

PotentialState build_state(const ExperimentConfig& cfg, double h) {
  GridPtr grid = Grid::build(ConvexDomain::parse(cfg.domain), h);
  DensitySpec dens = cfg.density_spec();
  if (!cfg.potential.empty()) {
    Expression e = Expression::parse(cfg.potential);
    return potential_from_function(grid, [&](const Point& x) { return e({x[0], x[1], x[2], h}); }, dens);
  }
  SolveOptions opt;
  opt.tol = cfg.solver_tol;
  opt.max_newton = cfg.max_newton;
  return solve_monge_ampere(grid, dens, opt);
}

bool nonincreasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) fail(ErrorKind::Io, "cannot write " + path.string());
  os << text;
  if (!text.empty() && text.back() != '\n') os << '\n';
}

void write_sections_csv(const fs::path& path, const std::vector<Section>& sections) {
  const int dim = sections.empty() ? 2 : sections.front().grid->dim();
  std::ostringstream os;
  os.precision(12);
  os << (dim == 3 ? "t,volume,mu,com_x,com_y,com_z\n" : "t,volume,mu,com_x,com_y\n");
  for (const Section& s : sections) {
    os << s.t << ',' << s.volume << ',' << s.mu << ',' << s.com[0] << ',' << s.com[1];
    if (dim == 3) os << ',' << s.com[2];
    os << '\n';
  }
  write_text(path, os.str());
}

void write_identities_csv(const fs::path& path, const std::vector<IdentityReport>& rows) {
  std::ostringstream os;
  os.precision(12);
  os << "name,h,left,right,rel_err,pass\n";
  for (const IdentityReport& r : rows)
    os << r.name << ',' << r.h << ',' << r.left << ',' << r.right << ',' << r.rel_err << ',' << (r.pass ? "true" : "false")
       << '\n';
  write_text(path, os.str());
}

std::string capacity_json(const CapacityResult& cap, const std::vector<ReciprocityRow>& rows) {
  json j;
  j["cap"] = cap.flux;
  j["q_form"] = cap.value;
  if (rows.empty()) {
    j["sandwich_lo"] = nullptr;
    j["sandwich_hi"] = nullptr;
  } else {
    double lo = -1e300, hi = 1e300;
    for (const ReciprocityRow& r : rows) {
      lo = std::max(lo, r.lo);
      hi = std::min(hi, r.hi);
    }
    j["sandwich_lo"] = lo;
    j["sandwich_hi"] = hi;
  }
  return j.dump(2);
}

namespace {

Check make_check(std::string name, double value, double threshold, bool pass) {
  return Check{std::move(name), value, threshold, pass};
}

void record_error(ExperimentResult& r, const std::string& where, const std::exception& e) {
  int code = 2;
  if (const auto* err = dynamic_cast<const Error*>(&e)) code = exit_code_for(err->kind());
  r.error += (r.error.empty() ? "" : "; ") + where + ": " + e.what();
  r.error_code = std::max(r.error_code, code);
}

template <class F>
void guarded(ExperimentResult& r, const std::string& where, F&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    record_error(r, where, e);
  }
}

// Heights whose hypothesis section (S(√t) in 2D, S(2t) in 3D) fits in V.
std::vector<double> admissible(const std::vector<double>& heights, int dim, double v_height) {
  std::vector<double> out;
  for (double t : heights) {
    double big = dim == 2 ? std::sqrt(t) : 2.0 * t;
    if ((dim == 3 || t < 1.0) && big < v_height) out.push_back(t);
  }
  return out;
}

void run_pole(const ExperimentConfig& cfg, const PotentialState& st, ExperimentResult& r, const fs::path& dir) {
  const int dim = st.dim();
  const Tolerances& tol = cfg.tol;
  r.metrics["ma_residual"] = st.residual;
  if (!cfg.exact.empty()) {
    Expression e = Expression::parse(cfg.exact);
    double err = 0.0;
    for (Index n : st.g().inside_nodes()) {
      Point x = st.g().position(n);
      err = std::max(err, std::abs(st.u[n] - e({x[0], x[1], x[2], st.g().h()})));
    }
    r.metrics["ma_error"] = err;
  }

  SectionFamily fam(st, r.pole);
  if (cfg.suites.count("sections")) {
    guarded(r, "sections", [&] {
      std::vector<Section> secs;
      for (double t : cfg.heights)
        if (t <= fam.max_height()) secs.push_back(fam.section(t));
      write_sections_csv(dir / "sections.csv", secs);
      bool mono = true;
      for (std::size_t i = 1; i < secs.size(); ++i)
        if (secs[i].volume < secs[i - 1].volume || !secs[i - 1].nodes.subset_of(secs[i].nodes)) mono = false;
      r.checks.push_back(make_check("sections_nested", double(secs.size()), 0.0, mono && !secs.empty()));
    });
  }
  const bool need_green = cfg.suites.count("green") || cfg.suites.count("capacity") ||
                          cfg.suites.count("identities") || cfg.suites.count("decay");
  if (!need_green) return;
  if (cfg.v_height > fam.max_height())
    fail(ErrorKind::NotContained, "V = S(x0, " + std::to_string(cfg.v_height) + ") is not compactly inside the domain");
  LinearizedOperator op(st, Region::sublevel(fam.height(), cfg.v_height));
  GreenFunction g = GreenSolver(op).solve(fam.center_node());

  if (cfg.suites.count("green")) {
    std::vector<double> hs = admissible(cfg.heights, dim, cfg.v_height);
    guarded(r, "fixed_density", [&] {
      FitReport fr = verify_bounds_fixed_density(g, fam, op.nodes(), hs);
      write_text(dir / "fixed_density.json", fr.to_json());
      if (dim == 2) {
        r.checks.push_back(make_check("fixed_density_r2", fr.r2, tol.fit_r2, fr.r2 >= tol.fit_r2 && fr.slope > 0.0));
      } else {
        double dev = std::abs(fr.slope + 0.5);
        r.checks.push_back(make_check("fixed_density_slope", fr.slope, tol.slope, dev <= tol.slope));
      }
    });
    guarded(r, "doubling", [&] {
      FitReport dr = verify_bounds_doubling(g, fam, op.nodes(), hs);
      write_text(dir / "doubling.json", dr.to_json());
      double spread = dr.extra["spread"];
      r.checks.push_back(make_check("doubling_spread", spread, tol.doubling_spread, spread <= tol.doubling_spread));
    });
  }

  if (cfg.suites.count("capacity")) {
    guarded(r, "capacity", [&] {
      std::vector<double> hs;
      for (double t : cfg.heights)
        if (2.0 * t < cfg.v_height) hs.push_back(t);
      require(!hs.empty(), ErrorKind::Configuration, "no height with S(x0, 2t) inside V");
      std::vector<ReciprocityRow> rows = reciprocity_check(op, fam, g, hs);
      std::ostringstream os;
      os.precision(12);
      os << "t,g_min,g_max,cap,lo,hi\n";
      double lo = 0.0, hi = 1e300;
      for (const ReciprocityRow& row : rows) {
        os << row.t << ',' << row.g_min << ',' << row.g_max << ',' << row.cap << ',' << row.lo << ',' << row.hi << '\n';
        lo = std::max(lo, row.lo);
        hi = std::min(hi, row.hi);
      }
      write_text(dir / "reciprocity.csv", os.str());
      CapacityResult cap = sublevel_capacity(st, op.region(), fam.height(), hs.front(), cfg.seed);
      write_text(dir / "capacity.json", capacity_json(cap, rows));
      r.checks.push_back(make_check("reciprocity_lo", lo, 1.0 + tol.reciprocity, lo <= 1.0 + tol.reciprocity));
      r.checks.push_back(make_check("reciprocity_hi", hi, 1.0 - tol.reciprocity, hi >= 1.0 - tol.reciprocity));
      r.checks.push_back(make_check("capacity_minimal", cap.min_perturbation_gain, 0.0, cap.min_perturbation_gain >= 0.0));
    });
  }

  if (cfg.suites.count("identities")) {
    std::vector<IdentityReport> rows;
    guarded(r, "green_mass", [&] {
      IdentityReport m = green_mass_identity(fam, cfg.v_height, g, tol.green_mass);
      r.metrics["green_mass"] = m.rel_err;
      rows.push_back(m);
    });
    guarded(r, "rho", [&] {
      IdentityReport m = rho_unit_mass(st, g, tol.rho);
      r.metrics["rho"] = m.rel_err;
      rows.push_back(m);
    });
    guarded(r, "boundary_flux", [&] {
      double worst = 0.0;
      for (IdentityReport& m : boundary_flux_identity(fam, cfg.flux_heights, tol.boundary_flux)) {
        worst = std::max(worst, m.rel_err);
        rows.push_back(m);
      }
      r.metrics["boundary_flux"] = worst;
    });
    guarded(r, "trace", [&] {
      IdentityReport m = trace_bound_check(fam, g, cfg.trace_height, tol.trace);
      r.metrics["trace"] = m.rel_err;
      rows.push_back(m);
    });
    guarded(r, "abp", [&] { rows.push_back(abp_dual_bound(st, g)); });
    if (dim == 2)
      guarded(r, "log_energy", [&] { rows.push_back(log_energy_bound(op, fam, g, cfg.trace_height, cfg.seed)); });
    write_identities_csv(dir / "identities.csv", rows);
    for (const IdentityReport& m : rows) r.checks.push_back(make_check(m.name, m.rel_err, m.tolerance, m.pass));
  }

  if (cfg.suites.count("decay")) {
    guarded(r, "decay", [&] {
      FitReport fr = distribution_decay(g, st, cfg.levels);
      write_text(dir / "decay.json", fr.to_json());
      r.checks.push_back(make_check("decay_slope", fr.slope, tol.decay_slope, std::abs(fr.slope + 3.0) <= tol.decay_slope));
    });
  }
}

json check_json(const Check& c) {
  return json{{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}};
}

std::string dir_name(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

}  // namespace

SuiteResult run_suite(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path root = output_path(cfg.output) / cfg.name;
  fs::create_directories(root);

  const std::size_t np = cfg.poles.size();
  std::vector<ExperimentResult> results(cfg.h.size() * np);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= cfg.h.size()) return;
      const double h = cfg.h[k];
      std::unique_ptr<PotentialState> st;
      ExperimentResult base;
      base.h = h;
      guarded(base, "solve", [&] { st = std::make_unique<PotentialState>(build_state(cfg, h)); });
      for (std::size_t j = 0; j < np; ++j) {
        ExperimentResult& r = results[k * np + j];
        r = base;
        r.pole = cfg.poles[j];
        if (!st) continue;
        guarded(r, "experiment", [&] {
          run_pole(cfg, *st, r, root / dir_name("h", k) / dir_name("x", j));
        });
      }
    }
  };
  const int nw = std::max(1, std::min<int>(cfg.workers, int(cfg.h.size())));
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SuiteResult out;
  out.experiments = std::move(results);
  json j;
  j["name"] = cfg.name;
  j["dim"] = cfg.dim();
  j["experiments"] = json::array();
  for (const ExperimentResult& r : out.experiments) {
    json e;
    e["h"] = r.h;
    e["pole"] = std::vector<double>(r.pole.begin(), r.pole.begin() + cfg.dim());
    e["error"] = r.error.empty() ? json(nullptr) : json(r.error);
    e["checks"] = json::array();
    bool pass = r.error.empty();
    for (const Check& c : r.checks) {
      e["checks"].push_back(check_json(c));
      pass = pass && c.pass;
    }
    e["metrics"] = r.metrics;
    e["pass"] = pass;
    j["experiments"].push_back(e);
    int code = r.error_code;
    for (const Check& c : r.checks)
      if (!c.pass) code = std::max(code, 1);
    out.exit_code = std::max(out.exit_code, code);
  }
  if (cfg.h.size() >= 3) {
    SweepTable t = sweep_table(cfg, out);
    json s;
    s["h"] = t.h;
    s["values"] = t.values;
    s["orders"] = t.orders;
    json mono;
    for (const auto& [name, vals] : t.values)
      if (name != "ma_residual" && name != "ma_error") mono[name] = nonincreasing(vals, cfg.tol.monotone_slack);
    s["nonincreasing"] = mono;
    j["sweep"] = s;
    write_text(root / "sweep.csv", t.to_csv());
  }
  j["exit_code"] = out.exit_code;
  j["pass"] = out.exit_code == 0;
  out.summary_json = j.dump(2);
  write_text(root / "summary.json", out.summary_json);
  return out;
}

SweepTable sweep_table(const ExperimentConfig& cfg, const SuiteResult& result) {
  require(cfg.h.size() >= 3, ErrorKind::Configuration, "config field 'h': a sweep needs at least three values");
  SweepTable t;
  const std::size_t np = cfg.poles.size();
  std::set<std::string> names;
  for (std::size_t k = 0; k < cfg.h.size(); ++k)
    for (const auto& [name, v] : result.experiments[k * np].metrics) names.insert(name);
  t.h = cfg.h;
  for (const std::string& name : names) {
    std::vector<double> vals;
    for (std::size_t k = 0; k < cfg.h.size(); ++k) {
      const auto& m = result.experiments[k * np].metrics;
      auto it = m.find(name);
      vals.push_back(it == m.end() ? NAN : it->second);
    }
    t.values[name] = vals;
    bool positive = std::all_of(vals.begin(), vals.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
    t.orders[name] = positive ? observed_orders(cfg.h, vals) : std::vector<double>(cfg.h.size() - 1, NAN);
  }
  return t;
}

SweepTable convergence_sweep(const ExperimentConfig& cfg) {
  require(cfg.h.size() >= 3, ErrorKind::Configuration, "config field 'h': a sweep needs at least three values");
  return sweep_table(cfg, run_suite(cfg));
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os.precision(12);
  os << "h,metric,value,order\n";
  for (const auto& [name, vals] : values) {
    const auto& ord = orders.at(name);
    for (std::size_t k = 0; k < h.size(); ++k) {
      os << h[k] << ',' << name << ',' << vals[k] << ',';
      if (k > 0 && std::isfinite(ord[k - 1])) os << ord[k - 1];
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace malab
