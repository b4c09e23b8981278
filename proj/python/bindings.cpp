#include <memory>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "malab/acceptance.hpp"
#include "malab/error.hpp"
#include "malab/expression.hpp"
#include "malab/field_io.hpp"
#include "malab/harness.hpp"

namespace py = pybind11;
using namespace malab;

namespace {

using StatePtr = std::shared_ptr<PotentialState>;

// Node values as a C-ordered array (ny, nx) or (nz, ny, nx); NaN off Ω.
py::array_t<double> to_numpy(const ScalarField& f) {
  const auto& n = f.grid().extents();
  std::vector<py::ssize_t> shape;
  if (f.grid().dim() == 3) shape = {n[2], n[1], n[0]};
  else shape = {n[1], n[0]};
  py::array_t<double> a(shape);
  auto v = f.values();
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::tuple point(const Point& p, int dim) {
  if (dim == 3) return py::make_tuple(p[0], p[1], p[2]);
  return py::make_tuple(p[0], p[1]);
}

Point as_point(const std::vector<double>& x) {
  require(x.size() == 2 || x.size() == 3, ErrorKind::Configuration, "a point needs two or three coordinates");
  Point p{};
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i];
  return p;
}

StatePtr solve(const std::string& domain, const std::string& f, double h, double lambda, double Lambda, double tol,
               int max_newton) {
  ExperimentConfig cfg;
  cfg.domain = domain;
  cfg.density = f;
  cfg.lambda = lambda;
  cfg.Lambda = Lambda;
  cfg.solver_tol = tol;
  cfg.max_newton = max_newton;
  return std::make_shared<PotentialState>(build_state(cfg, h));
}

StatePtr closed_form(const std::string& domain, const std::string& u, double h, const std::string& f, double lambda,
                     double Lambda) {
  ExperimentConfig cfg;
  cfg.domain = domain;
  cfg.potential = u;
  cfg.density = f;
  cfg.lambda = lambda;
  cfg.Lambda = Lambda;
  return std::make_shared<PotentialState>(build_state(cfg, h));
}

py::list sections(const PotentialState& st, const std::vector<double>& x0, const std::vector<double>& heights) {
  SectionFamily fam(st, as_point(x0));
  py::list out;
  for (double t : heights) {
    Section s = fam.section(t);
    py::dict d;
    d["t"] = s.t;
    d["volume"] = s.volume;
    d["mu"] = s.mu;
    d["com"] = point(s.com, st.dim());
    d["nodes"] = s.nodes.size();
    out.append(d);
  }
  return out;
}

py::dict green(const PotentialState& st, const std::vector<double>& x0, const std::string& V) {
  SectionFamily fam(st, as_point(x0));
  GreenFunction g;
  {
    py::gil_scoped_release release;
    LinearizedOperator op(st, parse_region(V, st, fam));
    g = GreenSolver(op).solve(fam.center_node());
  }
  py::dict d;
  d["values"] = to_numpy(g.g);
  d["pole"] = point(g.pole_position, st.dim());
  d["iterations"] = g.iterations;
  d["solver_error"] = g.solver_error;
  return d;
}

py::list identities(const PotentialState& st, const std::vector<double>& x0, double v_height,
                    const std::vector<double>& flux_heights, double trace_t) {
  std::vector<IdentityReport> rows;
  {
    py::gil_scoped_release release;
    SectionFamily fam(st, as_point(x0));
    LinearizedOperator op(st, Region::sublevel(fam.height(), v_height));
    GreenFunction g = GreenSolver(op).solve(fam.center_node());
    rows.push_back(green_mass_identity(fam, v_height, g));
    rows.push_back(rho_unit_mass(st, g));
    if (!flux_heights.empty())
      for (IdentityReport& r : boundary_flux_identity(fam, flux_heights)) rows.push_back(r);
    rows.push_back(trace_bound_check(fam, g, trace_t));
  }
  py::list out;
  for (const IdentityReport& r : rows) {
    py::dict d;
    d["name"] = r.name;
    d["h"] = r.h;
    d["left"] = r.left;
    d["right"] = r.right;
    d["rel_err"] = r.rel_err;
    d["pass"] = r.pass;
    out.append(d);
  }
  return out;
}

std::string capacity_of_section(const PotentialState& st, const std::vector<double>& x0, double t,
                                const std::string& V, const std::vector<double>& heights) {
  py::gil_scoped_release release;
  SectionFamily fam(st, as_point(x0));
  Region region = parse_region(V, st, fam);
  CapacityResult cap = sublevel_capacity(st, region, fam.height(), t);
  std::vector<ReciprocityRow> rows;
  if (!heights.empty()) {
    LinearizedOperator op(st, region);
    GreenFunction g = GreenSolver(op).solve(fam.center_node());
    rows = reciprocity_check(op, fam, g, heights);
  }
  return capacity_json(cap, rows);
}

py::tuple run_sweep(const std::string& toml_text) {
  ExperimentConfig cfg = ExperimentConfig::from_toml_string(toml_text);
  SuiteResult r;
  {
    py::gil_scoped_release release;
    r = run_suite(cfg);
  }
  return py::make_tuple(r.exit_code, r.summary_json);
}

}  // namespace

PYBIND11_MODULE(_malab, m) {
  m.doc() = "Monge-Ampère solver, sections, Green's functions and capacity";

  static py::exception<Error> error(m, "MalabError");
  static py::exception<SolverFailure> solver_error(m, "SolverFailure", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SolverFailure& e) {
      py::set_error(solver_error, e.what());
    } catch (const Error& e) {
      py::object exc = py::handle(error.ptr())(std::string(to_string(e.kind())) + ": " + e.what());
      exc.attr("kind") = to_string(e.kind());
      exc.attr("exit_code") = exit_code_for(e.kind());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<PotentialState, StatePtr>(m, "State")
      .def_property_readonly("dim", &PotentialState::dim)
      .def_property_readonly("h", [](const PotentialState& s) { return s.g().h(); })
      .def_property_readonly("domain", [](const PotentialState& s) { return s.g().domain().spec(); })
      .def_readonly("residual", &PotentialState::residual)
      .def_readonly("newton_iters", &PotentialState::newton_iters)
      .def_readonly("min_hessian_eig", &PotentialState::min_hessian_eig)
      .def_property_readonly("u", [](const PotentialState& s) { return to_numpy(s.u); })
      .def_property_readonly("f", [](const PotentialState& s) { return to_numpy(s.f); })
      .def_property_readonly("origin", [](const PotentialState& s) { return point(s.g().bbox_lo(), s.dim()); })
      .def("save", [](const PotentialState& s, const std::filesystem::path& p) { write_state(p, s); })
      .def_static("load", [](const std::filesystem::path& p) { return std::make_shared<PotentialState>(read_state(p)); });

  m.def("solve", &solve, py::arg("domain"), py::arg("f") = "1", py::arg("h") = 1.0 / 32, py::arg("lam") = 1.0,
        py::arg("Lam") = 1.0, py::arg("tol") = 1e-8, py::arg("max_newton") = 200,
        py::call_guard<py::gil_scoped_release>(), "Newton solve of det D²u = f with u = 0 on the boundary");
  m.def("closed_form", &closed_form, py::arg("domain"), py::arg("u"), py::arg("h"), py::arg("f") = "1",
        py::arg("lam") = 1.0, py::arg("Lam") = 1.0, "State from a closed-form potential sampled on the grid");
  m.def("sections", &sections, py::arg("state"), py::arg("x0"), py::arg("heights"));
  m.def("green", &green, py::arg("state"), py::arg("x0"), py::arg("V") = "section:0.45");
  m.def("identities", &identities, py::arg("state"), py::arg("x0"), py::arg("v_height") = 0.45,
        py::arg("flux_heights") = std::vector<double>{}, py::arg("trace_t") = 0.02);
  m.def("capacity_json", &capacity_of_section, py::arg("state"), py::arg("x0"), py::arg("t"),
        py::arg("V") = "section:0.45", py::arg("heights") = std::vector<double>{});
  m.def("run_sweep", &run_sweep, py::arg("toml"), "Runs an experiment config given as TOML text");
  m.def("evaluate", [](const std::string& expr, double x, double y, double z, double h) {
    return Expression::parse(expr)({x, y, z, h});
  }, py::arg("expr"), py::arg("x"), py::arg("y"), py::arg("z") = 0.0, py::arg("h") = 0.0);
}
