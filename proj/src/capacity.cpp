#include "malab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "malab/error.hpp"

namespace malab {

CapacityResult capacity(const LinearizedOperator& op, const NodeSet& K, std::uint64_t seed, int perturbations) {
  require(!K.empty(), ErrorKind::Parameter, "capacity of an empty set");
  require(K.subset_of(op.nodes()), ErrorKind::Domain, "K is not contained in V");
  const Grid& g = op.grid();
  NodeSet free = op.nodes().minus(K);
  ScalarField fixed(op.state().grid);
  for (Index n : K) fixed[n] = 1.0;
  CapacityResult r;
  // K = V leaves nothing to solve: Φ ≡ 1 and the energy sits on the edges leaving V.
  r.potential = free.empty() ? op.to_field(Eigen::VectorXd::Ones(Eigen::Index(op.size())))
                             : solve_dirichlet(op, free, fixed);
  r.K = K;
  r.V = op.nodes();

  Eigen::VectorXd x = op.from_field(r.potential);
  Eigen::VectorXd Ax = op.matrix() * x;
  const double hd = g.cell_volume();
  r.value = hd * x.dot(Ax);
  double kmax = 0.0, fmax = 0.0;
  for (Index n : op.nodes()) {
    double v = Ax[op.local(n)];
    if (K.contains(n)) {
      r.flux += v;
      kmax = std::max(kmax, std::abs(v));
    } else {
      fmax = std::max(fmax, std::abs(v));
    }
  }
  r.flux *= hd;
  r.residual = kmax > 0.0 ? fmax / kmax : fmax;
  r.breakdown = op.energy_breakdown(r.potential);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  r.min_perturbation_gain = perturbations > 0 ? 1e300 : 0.0;
  for (int k = 0; k < perturbations; ++k) {
    ScalarField trial = r.potential;
    double eps = 0.05 * (k + 1);
    for (Index n : free) trial[n] += eps * unif(rng);
    r.min_perturbation_gain = std::min(r.min_perturbation_gain, op.quadratic_form(trial) - r.value);
  }
  return r;
}

CapacityResult sublevel_capacity(const PotentialState& state, const Region& V, const ScalarField& w, double t,
                                 std::uint64_t seed, int perturbations) {
  const Grid& g = state.g();
  NodeSet K = NodeSet::from_predicate(state.grid, [&](Index n) { return V.nodes.contains(n) && w.defined(n) && w[n] <= t; });
  require(!K.empty(), ErrorKind::Parameter, "capacity of an empty set");
  Region ring;
  ring.nodes = V.nodes.minus(K);
  require(!ring.nodes.empty(), ErrorKind::Degenerate, "K fills V");
  ring.level = ScalarField(state.grid);
  for (Index n = 0; n < static_cast<Index>(g.size()); ++n) {
    double outer = V.has_level() && V.level.defined(n) ? V.level[n] : (V.nodes.contains(n) ? -1.0 : 0.0);
    double inner = w.defined(n) ? t - w[n] : outer;
    ring.level[n] = std::max(outer, inner);
  }
  for (Index n : ring.nodes)
    if (!(ring.level[n] < 0.0)) ring.level[n] = -1e-14;
  LinearizedOperator op(state, std::move(ring));

  ScalarField data(state.grid);
  for (Index n : g.inside_nodes()) data[n] = K.contains(n) ? 1.0 : 0.0;
  CapacityResult r;
  r.potential = solve_dirichlet(op, op.nodes(), ScalarField(state.grid), &data);
  for (Index n : K) r.potential[n] = 1.0;
  r.K = K;
  r.V = V.nodes;

  const double hd = g.cell_volume();
  const Eigen::VectorXd b = op.boundary_rhs(data);
  const double bsum = b.sum();
  auto energy = [&](const Eigen::VectorXd& x) { return hd * (x.dot(op.matrix() * x) - 2.0 * x.dot(b) + bsum); };
  Eigen::VectorXd x = op.from_field(r.potential);
  Eigen::VectorXd res = op.matrix() * x - b;
  r.value = energy(x);
  r.flux = hd * (bsum - x.dot(b));
  r.residual = res.lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), 1e-300);
  r.breakdown = op.energy_breakdown(r.potential, &data);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  r.min_perturbation_gain = perturbations > 0 ? 1e300 : 0.0;
  for (int k = 0; k < perturbations; ++k) {
    Eigen::VectorXd trial = x;
    double eps = 0.05 * (k + 1);
    for (Eigen::Index i = 0; i < trial.size(); ++i) trial[i] += eps * unif(rng);
    r.min_perturbation_gain = std::min(r.min_perturbation_gain, energy(trial) - r.value);
  }
  return r;
}

NodeSet closed_section(const SectionFamily& sections, double t) {
  const ScalarField& w = sections.height();
  return NodeSet::from_predicate(sections.state().grid, [&](Index n) { return w.defined(n) && w[n] <= t; });
}

double gamma_power(double s, double t, int n) {
  require(n >= 3, ErrorKind::Dimension, "power cutoff needs n >= 3");
  if (s <= t) return 1.0;
  if (s >= 2.0 * t) return 0.0;
  double k = 0.5 * (n - 2);
  double c = std::pow(t, k) / (1.0 - std::pow(0.5, k));
  return c * (std::pow(s, -k) - std::pow(2.0 * t, -k));
}

double gamma_log(double s, double t) {
  require(t > 0.0 && t < 1.0, ErrorKind::Parameter, "logarithmic cutoff needs 0 < t < 1");
  if (s <= t) return 1.0;
  if (s >= std::sqrt(t)) return 0.0;
  return 2.0 * std::log(s) / std::log(t) - 1.0;
}

namespace {

ScalarField compose(const SectionFamily& sections, const std::function<double(double)>& gamma) {
  const ScalarField& w = sections.height();
  ScalarField out(sections.state().grid);
  for (Index n : sections.state().g().inside_nodes()) out[n] = gamma(w[n]);
  return out;
}

}  // namespace

CutoffReport cutoff_energy_3d(const LinearizedOperator& op, const SectionFamily& sections, double t) {
  const int n = sections.state().dim();
  require(n == 3, ErrorKind::Dimension, "power cutoff energy is the n >= 3 estimate");
  require(t > 0.0, ErrorKind::Parameter, "height must be positive");
  if (2.0 * t > sections.max_height() || !compactly_inside(sections.section_unchecked(2.0 * t).nodes, op.nodes()))
    fail(ErrorKind::NotContained, "S(x0, 2t) is not compactly contained in V");
  CutoffReport r;
  r.t = t;
  r.energy = op.quadratic_form(compose(sections, [&](double s) { return gamma_power(s, t, n); }));
  r.capacity = capacity(op, closed_section(sections, t), 1, 0).value;
  r.bound = sections.measure(t) / t;
  return r;
}

CutoffReport cutoff_energy_2d(const SectionFamily& sections, double t) {
  require(sections.state().dim() == 2, ErrorKind::Dimension, "logarithmic cutoff energy is two-dimensional");
  require(t > 0.0 && t < 1.0, ErrorKind::Parameter, "height must lie in (0, 1)");
  double big = std::sqrt(t);
  if (big > sections.max_height()) fail(ErrorKind::NotContained, "S(x0, √t) is not compactly contained in the domain");
  LinearizedOperator op(sections.state(), Region::sublevel(sections.height(), big));
  CutoffReport r;
  r.t = t;
  r.energy = op.quadratic_form(compose(sections, [&](double s) { return gamma_log(s, t); }));
  r.capacity = capacity(op, closed_section(sections, t), 1, 0).value;
  double L = std::abs(std::log(t));
  r.bound = 8.0 / (L * L) * doubling_denominator(sections, t, big);
  return r;
}

std::vector<ReciprocityRow> reciprocity_check(const LinearizedOperator& op, const SectionFamily& sections,
                                              const GreenFunction& g, const std::vector<double>& heights) {
  require(g.pole == sections.center_node(), ErrorKind::Misuse, "Green's function pole differs from the section center");
  std::vector<ReciprocityRow> rows;
  for (double t : heights) {
    require(t > 0.0, ErrorKind::Parameter, "height must be positive");
    if (2.0 * t > sections.max_height() || !compactly_inside(sections.section_unchecked(2.0 * t).nodes, op.nodes()))
      fail(ErrorKind::NotContained, "S(x0, 2t) is not compactly contained in V for t = " + std::to_string(t));
    ReciprocityRow row;
    row.t = t;
    LevelSample s = sample_on_level(g.g, sections.height(), t);
    row.g_min = s.min;
    row.g_max = s.max;
    row.cap = sublevel_capacity(sections.state(), op.region(), sections.height(), t, 1, 0).value;
    row.lo = row.g_min * row.cap;
    row.hi = row.g_max * row.cap;
    rows.push_back(row);
  }
  return rows;
}

LevelSetCapacity level_set_capacity(const GreenFunction& g, double a, const LinearizedOperator& op) {
  double gmax = 0.0;
  for (Index n : g.domain) gmax = std::max(gmax, g.g[n]);
  if (!(a > 0.0 && a < gmax)) fail(ErrorKind::Degenerate, "level a must lie strictly between 0 and max g");
  NodeSet J = NodeSet::from_predicate(op.state().grid, [&](Index n) { return g.domain.contains(n) && g.g[n] >= a; });
  if (!compactly_inside(J, op.nodes())) fail(ErrorKind::Degenerate, "J_a is not compactly inside V");
  LevelSetCapacity r;
  r.a = a;
  ScalarField neg(op.state().grid);
  for (Index n : g.domain) neg[n] = -g.g[n];
  r.cap = sublevel_capacity(op.state(), op.region(), neg, -a, 1, 0).value;
  r.product = a * r.cap;
  Section s;
  s.grid = op.state().grid;
  s.center_node = g.pole;
  s.nodes = J;
  r.nodes_across = nodes_across(s);
  r.resolved = r.nodes_across >= 8;
  return r;
}

}  // namespace malab
