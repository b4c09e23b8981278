#include "malab/green.hpp"

#include <algorithm>
#include <cmath>

#include "malab/error.hpp"
#include "malab/quadrature.hpp"

namespace malab {

GreenSolver::GreenSolver(const LinearizedOperator& op, double rel_tol)
    : op_(&op), solver_(op.matrix(), op.grid().dim(), rel_tol) {}

GreenFunction GreenSolver::solve(Index pole) const {
  const Grid& g = op_->grid();
  if (pole < 0 || op_->local(pole) < 0) fail(ErrorKind::Domain, "pole is not a node of V");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(op_->size()));
  b[op_->local(pole)] = 1.0 / g.cell_volume();
  GreenFunction out;
  out.pole = pole;
  out.pole_position = g.position(pole);
  out.g = op_->to_field(solver_.solve(b));
  out.domain = op_->nodes();
  out.iterations = solver_.last_iterations();
  out.solver_error = solver_.last_error();
  return out;
}

GreenFunction GreenSolver::solve(const Point& x0) const { return solve(op_->grid().nearest_node(x0)); }

GreenFunction green_function(const LinearizedOperator& op, const Point& x0) { return GreenSolver(op).solve(x0); }

LevelSample sample_on_level(const ScalarField& f, const ScalarField& w, double t) {
  const Grid& g = w.grid();
  LevelSample s;
  s.min = 1e300;
  s.max = -1e300;
  double sum = 0.0;
  for (Index n : g.inside_nodes()) {
    if (!w.defined(n) || !f.defined(n)) continue;
    for (const Offset& o : g.axis_offsets()) {
      Index q = g.neighbor(n, o);
      if (q < 0 || !g.inside(q) || !w.defined(q) || !f.defined(q)) continue;
      double a = w[n] - t, b = w[q] - t;
      if (!((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0))) continue;
      double theta = a / (a - b);
      double v = f[n] + theta * (f[q] - f[n]);
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
      sum += v;
      ++s.crossings;
    }
  }
  if (s.crossings == 0) fail(ErrorKind::Degenerate, "no grid edge crosses the level " + std::to_string(t));
  s.mean = sum / double(s.crossings);
  return s;
}

int nodes_across(const Section& s) {
  const Grid& g = *s.grid;
  int best = 1 << 30;
  for (const Offset& o : g.axis_offsets()) {
    int count = s.nodes.contains(s.center_node) ? 1 : 0;
    for (int sign : {1, -1}) {
      Index q = g.neighbor(s.center_node, {sign * o[0], sign * o[1], sign * o[2]});
      while (s.nodes.contains(q)) {
        ++count;
        q = g.neighbor(q, {sign * o[0], sign * o[1], sign * o[2]});
      }
    }
    best = std::min(best, count);
  }
  return best;
}

namespace {

constexpr int kResolutionFloor = 8;

void check_pole(const GreenFunction& g, const SectionFamily& sections) {
  require(g.pole == sections.center_node(), ErrorKind::Misuse, "Green's function pole differs from the section center");
}

// The pointwise bounds need S(2t) in 3D and S(√t) in 2D compactly inside V.
double hypothesis_height(int dim, double t) {
  if (dim == 2) {
    require(t > 0.0 && t < 1.0, ErrorKind::Parameter, "2D heights must lie in (0, 1)");
    return std::sqrt(t);
  }
  return 2.0 * t;
}

void check_hypothesis(const SectionFamily& sections, const NodeSet& V, double t) {
  int dim = sections.state().dim();
  double big = hypothesis_height(dim, t);
  if (big > sections.max_height() || !compactly_inside(sections.section_unchecked(big).nodes, V))
    fail(ErrorKind::NotContained, "section of height " + std::to_string(big) + " (for t = " + std::to_string(t) +
                                      ") is not compactly contained in V");
}

}  // namespace

FitReport verify_bounds_fixed_density(const GreenFunction& g, const SectionFamily& sections, const NodeSet& V,
                                      const std::vector<double>& heights) {
  check_pole(g, sections);
  const int dim = sections.state().dim();
  const ScalarField& w = sections.height();
  std::vector<std::pair<double, double>> pts, pmin, pmax;
  double floor = 0.0;
  int dropped = 0;
  for (double t : heights) {
    check_hypothesis(sections, V, t);
    Section s = sections.section_unchecked(t);
    if (nodes_across(s) < kResolutionFloor) {
      ++dropped;
      floor = std::max(floor, t);
      continue;
    }
    LevelSample a = sample_on_level(g.g, w, t);
    pmin.emplace_back(t, a.min);
    pmax.emplace_back(t, a.max);
    if (dim == 3) {
      LevelSample b = sample_on_level(g.g, w, 2.0 * t);
      pts.emplace_back(t, a.mean - b.mean);
    } else {
      pts.emplace_back(t, a.mean);
    }
  }
  FitReport r = fit_report(dim == 3 ? "power" : "log-linear", std::move(pts));
  if (dim == 3) {
    r.extra["raw_slope_min"] = fit_report("power", pmin).slope;
    r.extra["raw_slope_max"] = fit_report("power", pmax).slope;
  } else {
    FitReport lo = fit_report("log-linear", pmin), hi = fit_report("log-linear", pmax);
    r.extra["slope_min"] = lo.slope;
    r.extra["slope_max"] = hi.slope;
    r.extra["r2_min"] = lo.r2;
    r.extra["r2_max"] = hi.r2;
  }
  r.extra["resolution_floor"] = floor;
  r.extra["dropped_heights"] = dropped;
  return r;
}

double doubling_denominator(const SectionFamily& sections, double a, double b, int points) {
  require(0.0 < a && a < b, ErrorKind::Parameter, "integration interval must satisfy 0 < a < b");
  require(points >= 32, ErrorKind::Parameter, "at least 32 quadrature points");
  // ∫ μ(s)/s² ds = ∫ μ(s)/s d(log s), trapezoid in log s.
  const double la = std::log(a), lb = std::log(b), dl = (lb - la) / (points - 1);
  double sum = 0.0;
  for (int i = 0; i < points; ++i) {
    double s = std::exp(la + i * dl);
    double v = sections.measure(s) / s;
    sum += (i == 0 || i == points - 1) ? 0.5 * v : v;
  }
  return sum * dl;
}

FitReport verify_bounds_doubling(const GreenFunction& g, const SectionFamily& sections, const NodeSet& V,
                                 const std::vector<double>& heights) {
  check_pole(g, sections);
  const int dim = sections.state().dim();
  std::vector<std::pair<double, double>> pts;
  double floor = 0.0;
  int dropped = 0;
  for (double t : heights) {
    check_hypothesis(sections, V, t);
    if (nodes_across(sections.section_unchecked(t)) < kResolutionFloor) {
      ++dropped;
      floor = std::max(floor, t);
      continue;
    }
    LevelSample a = sample_on_level(g.g, sections.height(), t);
    double bound;
    if (dim == 3) {
      bound = t / sections.measure(t);
    } else {
      double L = std::abs(std::log(t));
      bound = L * L / doubling_denominator(sections, t, std::sqrt(t));
    }
    pts.emplace_back(t, a.min / bound);
  }
  require(pts.size() >= 2, ErrorKind::InsufficientData, "doubling check needs at least two resolved heights");
  FitReport r;
  r.model = "ratio";
  std::vector<double> x, y;
  double lo = 1e300, hi = -1e300;
  for (auto [t, v] : pts) {
    x.push_back(std::log(t));
    y.push_back(std::log(std::max(v, 1e-300)));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  LineFit f = fit_line(x, y);
  r.slope = f.slope;
  r.intercept = f.intercept;
  r.r2 = f.r2;
  r.points = std::move(pts);
  r.extra["ratio_min"] = lo;
  r.extra["ratio_max"] = hi;
  r.extra["spread"] = lo > 0.0 ? hi / lo : INFINITY;
  r.extra["resolution_floor"] = floor;
  r.extra["dropped_heights"] = dropped;
  return r;
}

double gradient_lp_integral(const GreenFunction& g, const Section& s, double p) {
  require(g.g.grid().dim() == 2, ErrorKind::Dimension, "the gradient integrability estimate is two-dimensional");
  require(p > 1.0, ErrorKind::Parameter, "exponent p must exceed 1");
  VectorField grad = central_gradient(g.g);
  double sum = 0.0;
  for (Index n : s.nodes) {
    if (n == g.pole) continue;
    sum += std::pow(grad[n].norm(), p);
  }
  return sum * g.g.grid().cell_volume();
}

FitReport distribution_decay(const GreenFunction& g, const PotentialState& state, const std::vector<double>& levels) {
  require(state.dim() == 3, ErrorKind::Dimension, "distribution decay is checked for n >= 3 only");
  for (std::size_t i = 1; i < levels.size(); ++i)
    require(levels[i] > levels[i - 1], ErrorKind::Parameter, "levels must be strictly increasing");
  const Grid& grid = state.g();
  std::vector<std::pair<double, double>> table;
  for (double T : levels) {
    double mu = 0.0;
    for (Index n : g.domain)
      if (g.g[n] > T) mu += state.f[n];
    table.emplace_back(T, mu * grid.cell_volume());
  }
  std::vector<std::pair<double, double>> pos;
  for (auto pt : table)
    if (pt.second > 0.0) pos.push_back(pt);
  FitReport raw = fit_report("power", pos);

  // Offset scan: μ ≈ K (T + b)^p.
  double best_b = 0.0;
  LineFit best = fit_line([&] {
    std::vector<double> x;
    for (auto [t, v] : pos) x.push_back(std::log(t));
    return x;
  }(), [&] {
    std::vector<double> y;
    for (auto [t, v] : pos) y.push_back(std::log(v));
    return y;
  }());
  const double tmax = pos.back().first;
  for (int i = 1; i <= 400; ++i) {
    double b = tmax * i / 400.0;
    std::vector<double> x, y;
    for (auto [t, v] : pos) {
      x.push_back(std::log(t + b));
      y.push_back(std::log(v));
    }
    LineFit f = fit_line(x, y);
    if (f.r2 > best.r2) {
      best = f;
      best_b = b;
    }
  }
  FitReport r;
  r.model = "offset-power";
  r.slope = best.slope;
  r.intercept = best.intercept;
  r.r2 = best.r2;
  r.points = std::move(table);
  r.extra["raw_slope"] = raw.slope;
  r.extra["offset"] = best_b;
  return r;
}

double critical_rate(int dim, double r) { return dim == 2 ? std::abs(std::log(r)) : std::pow(r, -0.5); }

double compliant_rate(int dim, double r) {
  return dim == 2 ? std::sqrt(std::abs(std::log(r))) : std::pow(r, -0.25);
}

RemovableDemoReport removable_singularity_demo(const PotentialState& state, const RemovableDemoConfig& cfg) {
  const int dim = state.dim();
  require(dim == 2 || dim == 3, ErrorKind::Dimension, "demo runs in two or three dimensions");
  require(cfg.R > 0.0, ErrorKind::Parameter, "outer height must be positive");
  require(!cfg.r_list.empty(), ErrorKind::Parameter, "empty list of inner heights");
  std::vector<double> rs = cfg.r_list;
  std::sort(rs.begin(), rs.end(), std::greater<>());
  require(rs.front() < cfg.R, ErrorKind::Parameter, "inner heights must lie below the outer height");

  auto inner_value = [&](double r) {
    switch (cfg.inner) {
      case InnerData::Compliant: return compliant_rate(dim, r);
      case InnerData::Zero: return 0.0;
      case InnerData::Critical: return critical_rate(dim, r);
      case InnerData::Custom:
        require(bool(cfg.custom), ErrorKind::Configuration, "custom inner data needs a function");
        return cfg.custom(r);
    }
    return 0.0;
  };
  if (cfg.inner == InnerData::Custom) {
    double prev = INFINITY;
    for (double r : rs) {
      double v = inner_value(r);
      require(std::isfinite(v), ErrorKind::Configuration, "demo misconfiguration: inner data not finite");
      double rel = std::abs(v) / critical_rate(dim, r);
      if (!(rel < prev))
        fail(ErrorKind::Configuration,
             "demo misconfiguration: inner data does not decay relative to the critical rate at r = " +
                 std::to_string(r));
      prev = rel;
    }
  }

  const Point center = state.g().domain().center();
  SectionFamily fam(state, center);
  const ScalarField& w = fam.height();
  if (cfg.R > fam.max_height())
    fail(ErrorKind::NotContained, "outer section S(0, R) is not compactly contained in the domain");

  const Grid& g = state.g();
  ScalarField outer(state.grid);
  for (Index n : g.inside_nodes()) {
    if (!(w[n] >= cfg.R)) continue;
    double v = cfg.boundary ? (*cfg.boundary)[n] : cfg.outer_value;
    require(std::isfinite(v), ErrorKind::Configuration, "outer boundary data must be bounded");
    outer[n] = v;
  }
  LinearizedOperator full(state, Region::sublevel(w, cfg.R));
  ScalarField none(state.grid);
  ScalarField vt = solve_dirichlet(full, full.nodes(), none, &outer);

  RemovableDemoReport rep;
  for (double r : rs) {
    double psi = inner_value(r);
    ScalarField bnd = outer;
    for (Index n : g.inside_nodes())
      if (w[n] < r) bnd[n] = psi;
    LinearizedOperator ring(state, Region::shell(w, r, cfg.R));
    ScalarField v = solve_dirichlet(ring, ring.nodes(), none, &bnd);
    double worst = 0.0;
    for (Index n : full.nodes())
      if (w[n] >= cfg.probe_lo * cfg.R && w[n] <= cfg.probe_hi * cfg.R) worst = std::max(worst, std::abs(v[n] - vt[n]));
    rep.r.push_back(r);
    rep.inner_value.push_back(psi);
    rep.discrepancy.push_back(worst);
  }
  rep.decreasing = true;
  for (std::size_t i = 1; i < rep.discrepancy.size(); ++i)
    if (!(rep.discrepancy[i] < rep.discrepancy[i - 1])) rep.decreasing = false;
  return rep;
}

double harnack_ratio(const GreenFunction& g, const ScalarField& w, double t, double tau) {
  double lo = 1e300, hi = 0.0;
  for (Index n : g.domain) {
    if (!w.defined(n) || w[n] < tau * t || w[n] > t) continue;
    lo = std::min(lo, g.g[n]);
    hi = std::max(hi, g.g[n]);
  }
  require(hi > 0.0 && lo > 0.0, ErrorKind::Degenerate, "Harnack shell is empty or g vanishes on it");
  return hi / lo;
}

}  // namespace malab
