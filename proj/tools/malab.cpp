#include <cmath>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "malab/acceptance.hpp"
#include "malab/error.hpp"
#include "malab/expression.hpp"
#include "malab/field_io.hpp"
#include "malab/harness.hpp"

using namespace malab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fits_csv(const FitReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << "t,value\n";
  for (auto [t, v] : r.points) os << t << ',' << v << '\n';
  return os.str();
}

fs::path sibling_json(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".json");
}

void add_config(CLI::App* app, std::string& path) {
  app->add_option("--config", path, "TOML experiment config; flags given here override it");
}

ExperimentConfig load_config(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : ExperimentConfig::from_toml_file(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monge-Ampère lab: solver, sections, Green's functions, capacity and identity checks"};
  // -h is free for the grid spacing.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  // solve
  std::string cfg_path, domain, fexpr, out, csv;
  double lambda = NAN, Lambda = NAN, h = NAN, tol = NAN;
  int max_newton = 0;
  auto* solve = app.add_subcommand("solve", "Solve det D²u = f, u = 0 on the boundary");
  add_config(solve, cfg_path);
  solve->add_option("--domain", domain, "disk:R, ball:R, ellipse:a,b, ellipsoid:a,b,c, smooth2:k, smooth3:k");
  solve->add_option("--f", fexpr, "closed-form density over x, y, z, r, h");
  solve->add_option("--lambda", lambda, "lower density bound");
  solve->add_option("--Lambda", Lambda, "upper density bound");
  solve->add_option("--h", h, "grid spacing");
  solve->add_option("--tol", tol, "residual tolerance");
  solve->add_option("--max-newton", max_newton, "Newton iteration cap");
  solve->add_option("--out", out, "state file")->required();
  solve->add_option("--csv", csv, "also write u as CSV");

  // sections
  std::string state_path, x0_text = "0,0";
  std::vector<double> heights;
  double alpha = 0.5;
  auto* sections = app.add_subcommand("sections", "Section volumes, measures and centroids");
  sections->add_option("--state", state_path)->required();
  sections->add_option("--x0", x0_text, "center, comma separated");
  sections->add_option("--heights", heights)->delimiter(',')->required();
  sections->add_option("--alpha", alpha, "dilation factor for the doubling report");
  sections->add_option("--csv", csv)->required();

  // green
  std::string v_text = "section:0.45";
  auto* green = app.add_subcommand("green", "Green's function of the linearized operator");
  green->add_option("--state", state_path)->required();
  green->add_option("--V", v_text, "section:T or a domain spec");
  green->add_option("--x0", x0_text);
  green->add_option("--out", out)->required();
  green->add_option("--csv", csv);

  // verify
  std::string mode, suite;
  std::vector<double> ps{1.5, 2.0, 2.5}, levels, flux_heights;
  double trace_t = 0.02, slope_tol = 0.05, min_r2 = 0.98, max_spread = 10.0, decay_tol = 0.1;
  auto* verify = app.add_subcommand("verify", "Check the Green's function bounds or the integral identities");
  verify->add_option("--mode", mode, "thm1i, thm1ii, thm1iii or decay")
      ->check(CLI::IsMember({"thm1i", "thm1ii", "thm1iii", "decay"}));
  verify->add_option("--suite", suite, "identities")->check(CLI::IsMember({"identities"}));
  verify->add_option("--state", state_path)->required();
  verify->add_option("--V", v_text);
  verify->add_option("--x0", x0_text);
  verify->add_option("--heights", heights)->delimiter(',');
  verify->add_option("--p", ps, "exponents for thm1iii")->delimiter(',');
  verify->add_option("--levels", levels, "thresholds T for decay")->delimiter(',');
  verify->add_option("--flux-heights", flux_heights)->delimiter(',');
  verify->add_option("--t", trace_t, "height for the trace identity");
  verify->add_option("--slope-tol", slope_tol);
  verify->add_option("--min-r2", min_r2);
  verify->add_option("--max-spread", max_spread);
  verify->add_option("--decay-tol", decay_tol);
  verify->add_option("--csv", csv)->required();

  // capacity
  std::string k_text, check;
  double recip_tol = 0.05;
  auto* capacity_cmd = app.add_subcommand("capacity", "Capacity of K in V and the reciprocity sandwich");
  capacity_cmd->add_option("--state", state_path)->required();
  capacity_cmd->add_option("--K", k_text, "section:x0=X,Y[,Z]:t=T or a domain spec")->required();
  capacity_cmd->add_option("--V", v_text);
  capacity_cmd->add_option("--x0", x0_text, "center when K is a domain");
  capacity_cmd->add_option("--check", check)->check(CLI::IsMember({"reciprocity"}));
  capacity_cmd->add_option("--heights", heights)->delimiter(',');
  capacity_cmd->add_option("--tol", recip_tol, "reciprocity slack");
  capacity_cmd->add_option("--out", out, "JSON output")->required();

  // sweep
  int workers = 0;
  std::string output_dir;
  auto* sweep = app.add_subcommand("sweep", "Run an experiment config over its grids and poles");
  sweep->add_option("--config", cfg_path)->required();
  sweep->add_option("--workers", workers, "worker threads");
  sweep->add_option("--output", output_dir, "output directory (relative to MALAB_OUTPUT_ROOT)");

  // acceptance
  auto* acceptance = app.add_subcommand("acceptance", "Run the acceptance criteria");
  acceptance->add_option("--config", cfg_path, "TOML overrides of the acceptance settings");
  acceptance->add_option("--output", output_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*solve) {
      ExperimentConfig cfg = load_config(cfg_path);
      if (!domain.empty()) cfg.domain = domain;
      if (!fexpr.empty()) {
        cfg.density = fexpr;
        cfg.potential.clear();
      }
      if (!std::isnan(lambda)) cfg.lambda = lambda;
      if (!std::isnan(Lambda)) cfg.Lambda = Lambda;
      if (std::isnan(lambda) && std::isnan(Lambda) && !fexpr.empty() && cfg_path.empty()) {
        // Bounds from sampling when none are given.
        double v = Expression::parse(fexpr)({0, 0, 0, 0});
        cfg.lambda = cfg.Lambda = v;
        Expression e = Expression::parse(fexpr);
        double step = std::isnan(h) ? 1.0 / 64 : h;
        GridPtr g = Grid::build(ConvexDomain::parse(cfg.domain), step);
        for (Index n : g->inside_nodes()) {
          Point x = g->position(n);
          double f = e({x[0], x[1], x[2], step});
          cfg.lambda = std::min(cfg.lambda, f);
          cfg.Lambda = std::max(cfg.Lambda, f);
        }
      }
      if (!std::isnan(h)) cfg.h = {h};
      if (!std::isnan(tol)) cfg.solver_tol = tol;
      if (max_newton > 0) cfg.max_newton = max_newton;
      if (cfg.h.empty()) fail(ErrorKind::Configuration, "config field 'h': no grid spacing given");
      if (cfg.heights.empty()) cfg.heights = {1.0};
      cfg.validate();
      PotentialState st = build_state(cfg, cfg.h.back());
      fs::path p = output_path(out);
      write_state(p, st);
      json side{{"residual", st.residual}, {"newton_iters", st.newton_iters}, {"min_hessian_eig", st.min_hessian_eig}};
      write_text(sibling_json(p), side.dump(2));
      if (!csv.empty()) write_field_csv(output_path(csv), st.u);
      std::cout << side.dump() << '\n';
      return 0;
    }

    if (*sections) {
      PotentialState st = read_state(state_path);
      Point x0 = parse_point(x0_text);
      SectionFamily fam(st, x0);
      std::vector<Section> secs;
      for (double t : heights) secs.push_back(fam.section(t));
      write_sections_csv(output_path(csv), secs);
      if (heights.size() >= 2) {
        DoublingParams d = doubling_report(st, x0, heights, alpha);
        json j{{"alpha", d.alpha}, {"beta", d.beta}, {"beta_prime", d.beta_prime}, {"heights", d.heights}};
        write_text(sibling_json(output_path(csv)), j.dump(2));
      }
      return 0;
    }

    if (*green) {
      PotentialState st = read_state(state_path);
      SectionFamily fam(st, parse_point(x0_text));
      LinearizedOperator op(st, parse_region(v_text, st, fam));
      GreenFunction g = GreenSolver(op).solve(fam.center_node());
      json meta{{"kind", "green"}, {"V", v_text}, {"pole", std::vector<double>(g.pole_position.begin(), g.pole_position.end())},
                {"iterations", g.iterations}, {"solver_error", g.solver_error}};
      write_field(output_path(out), g.g, meta.dump());
      if (!csv.empty()) write_field_csv(output_path(csv), g.g);
      std::cout << meta.dump() << '\n';
      return 0;
    }

    if (*verify) {
      if (mode.empty() == suite.empty()) fail(ErrorKind::Configuration, "give exactly one of --mode and --suite");
      PotentialState st = read_state(state_path);
      SectionFamily fam(st, parse_point(x0_text));
      LinearizedOperator op(st, parse_region(v_text, st, fam));
      GreenFunction g = GreenSolver(op).solve(fam.center_node());
      const fs::path csv_path = output_path(csv);
      bool pass = true;
      if (suite == "identities") {
        std::vector<IdentityReport> rows;
        if (v_text.rfind("section:", 0) == 0) rows.push_back(green_mass_identity(fam, std::stod(v_text.substr(8)), g));
        rows.push_back(rho_unit_mass(st, g));
        if (!flux_heights.empty())
          for (IdentityReport& r : boundary_flux_identity(fam, flux_heights)) rows.push_back(r);
        rows.push_back(trace_bound_check(fam, g, trace_t));
        write_identities_csv(csv_path, rows);
        for (const IdentityReport& r : rows) pass = pass && r.pass;
      } else if (mode == "thm1i" || mode == "thm1ii") {
        FitReport r = mode == "thm1i" ? verify_bounds_fixed_density(g, fam, op.nodes(), heights)
                                      : verify_bounds_doubling(g, fam, op.nodes(), heights);
        write_text(csv_path, fits_csv(r));
        write_text(sibling_json(csv_path), r.to_json());
        if (mode == "thm1ii") pass = r.extra["spread"] <= max_spread;
        else if (st.dim() == 3) pass = std::abs(r.slope + 0.5) <= slope_tol;
        else pass = r.r2 >= min_r2 && r.slope > 0.0;
      } else if (mode == "thm1iii") {
        if (heights.empty()) fail(ErrorKind::Configuration, "thm1iii needs --heights with the section height");
        std::ostringstream os;
        os.precision(12);
        os << "p,t,h,integral\n";
        for (double t : heights) {
          Section s = fam.section(t);
          for (double p : ps) os << p << ',' << t << ',' << st.g().h() << ',' << gradient_lp_integral(g, s, p) << '\n';
        }
        write_text(csv_path, os.str());
      } else {
        FitReport r = distribution_decay(g, st, levels);
        write_text(csv_path, fits_csv(r));
        write_text(sibling_json(csv_path), r.to_json());
        pass = std::abs(r.slope + 3.0) <= decay_tol;
      }
      return pass ? 0 : 1;
    }

    if (*capacity_cmd) {
      PotentialState st = read_state(state_path);
      Point x0 = parse_point(x0_text);
      ScalarField klevel;
      double kt = 0.0;
      std::unique_ptr<SectionFamily> fam;
      if (k_text.rfind("section:", 0) == 0) {
        // section:x0=X,Y:t=T
        auto xpos = k_text.find("x0=");
        auto tpos = k_text.find(":t=");
        if (xpos == std::string::npos || tpos == std::string::npos || tpos < xpos)
          fail(ErrorKind::Configuration, "K must look like section:x0=X,Y:t=T");
        x0 = parse_point(k_text.substr(xpos + 3, tpos - xpos - 3));
        kt = std::stod(k_text.substr(tpos + 3));
        fam = std::make_unique<SectionFamily>(st, x0);
        klevel = fam->height();
      } else {
        fam = std::make_unique<SectionFamily>(st, x0);
        ConvexDomain kd = ConvexDomain::parse(k_text);
        klevel = ScalarField::sample(st.grid, [&](const Point& x) { return kd.level(x); }, true);
      }
      Region V = parse_region(v_text, st, *fam);
      CapacityResult cap = sublevel_capacity(st, V, klevel, kt);
      std::vector<ReciprocityRow> rows;
      bool pass = cap.min_perturbation_gain >= 0.0;
      if (check == "reciprocity") {
        if (heights.empty()) heights = {kt};
        LinearizedOperator op(st, V);
        GreenFunction g = GreenSolver(op).solve(fam->center_node());
        rows = reciprocity_check(op, *fam, g, heights);
        for (const ReciprocityRow& r : rows) pass = pass && r.lo <= 1.0 + recip_tol && r.hi >= 1.0 - recip_tol;
      }
      std::string text = capacity_json(cap, rows);
      write_text(output_path(out), text);
      std::cout << text << '\n';
      return pass ? 0 : 1;
    }

    if (*sweep) {
      ExperimentConfig cfg = ExperimentConfig::from_toml_file(cfg_path);
      if (workers > 0) cfg.workers = workers;
      if (!output_dir.empty()) cfg.output = output_dir;
      SuiteResult r = run_suite(cfg);
      for (const ExperimentResult& e : r.experiments) {
        std::cout << "h=" << e.h << " pole=(" << e.pole[0] << ',' << e.pole[1];
        if (cfg.dim() == 3) std::cout << ',' << e.pole[2];
        std::cout << ')';
        if (!e.error.empty()) std::cout << " error: " << e.error;
        for (const Check& c : e.checks)
          if (!c.pass) std::cout << " FAIL " << c.name << '=' << c.value;
        std::cout << '\n';
      }
      std::cout << "summary: " << (output_path(cfg.output) / cfg.name / "summary.json").string() << '\n';
      return r.exit_code;
    }

    if (*acceptance) {
      AcceptanceConfig cfg = cfg_path.empty() ? AcceptanceConfig{} : AcceptanceConfig::from_toml_file(cfg_path);
      if (!output_dir.empty()) cfg.output = output_dir;
      AcceptanceReport r = run_acceptance(cfg, std::cout);
      int passed = 0;
      for (const CriterionResult& c : r.criteria) passed += c.pass ? 1 : 0;
      std::cout << passed << "/" << r.criteria.size() << " criteria passed in " << r.seconds << " s\n";
      return r.all_pass() ? 0 : 1;
    }
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << " (residual " << e.residual() << ", " << e.iterations()
              << " iterations)\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
