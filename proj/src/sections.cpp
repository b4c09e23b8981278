#include "malab/sections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "malab/error.hpp"

namespace malab {

namespace {

bool buffered(const Grid& g, Index n) {
  if (g.kind(n) != NodeKind::Interior) return false;
  for (int k = 0; k < g.dim(); ++k)
    for (int s : {-2, -1, 1, 2}) {
      Offset o{0, 0, 0};
      o[k] = s;
      if (!g.inside(g.neighbor(n, o))) return false;
    }
  return true;
}

void finish(Section& s, const PotentialState& state) {
  const Grid& g = *s.grid;
  s.volume = double(s.nodes.size()) * g.cell_volume();
  Point c{0, 0, 0};
  double mu = 0.0;
  for (Index n : s.nodes) {
    Point p = g.position(n);
    for (int k = 0; k < 3; ++k) c[k] += p[k];
    mu += state.f[n];
  }
  if (!s.nodes.empty())
    for (double& v : c) v /= double(s.nodes.size());
  s.com = c;
  s.mu = mu * g.cell_volume();
}

}  // namespace

SectionFamily::SectionFamily(const PotentialState& state, const Point& x0) : state_(&state), w_(state.grid) {
  const Grid& g = state.g();
  center_ = g.nearest_node(x0);
  require(g.inside(center_), ErrorKind::Domain, "section center lies outside the domain");
  const Vec3 grad = state.grad_u[center_];
  const Point pc = g.position(center_);
  const double uc = state.u[center_];
  auto inside = g.inside_nodes();
  max_height_ = 1e300;
  for (Index n : inside) {
    Point p = g.position(n);
    double l = uc;
    for (int k = 0; k < g.dim(); ++k) l += grad[k] * (p[k] - pc[k]);
    w_[n] = state.u[n] - l;
    if (!buffered(g, n)) max_height_ = std::min(max_height_, w_[n]);
  }
  order_.assign(inside.begin(), inside.end());
  std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) { return w_[a] < w_[b]; });
  sorted_w_.reserve(order_.size());
  prefix_mu_.assign(order_.size() + 1, 0.0);
  for (std::size_t i = 0; i < order_.size(); ++i) {
    sorted_w_.push_back(w_[order_[i]]);
    prefix_mu_[i + 1] = prefix_mu_[i] + state.f[order_[i]] * g.cell_volume();
  }
}

Point SectionFamily::x0() const { return state_->g().position(center_); }

Section SectionFamily::section_unchecked(double t) const {
  require(t > 0.0, ErrorKind::Parameter, "section height must be positive");
  auto end = std::lower_bound(sorted_w_.begin(), sorted_w_.end(), t);
  std::vector<Index> nodes(order_.begin(), order_.begin() + (end - sorted_w_.begin()));
  Section s;
  s.grid = state_->grid;
  s.center_node = center_;
  s.x0 = x0();
  s.t = t;
  s.nodes = NodeSet(s.grid, std::move(nodes));
  finish(s, *state_);
  return s;
}

Section SectionFamily::section(double t) const {
  require(t > 0.0, ErrorKind::Parameter, "section height must be positive");
  if (t > max_height_)
    fail(ErrorKind::NotContained, "section of height " + std::to_string(t) +
                                      " is not compactly contained in the domain (max height " +
                                      std::to_string(max_height_) + ")");
  return section_unchecked(t);
}

double SectionFamily::volume(double t) const {
  auto k = std::lower_bound(sorted_w_.begin(), sorted_w_.end(), t) - sorted_w_.begin();
  return double(k) * state_->g().cell_volume();
}

double SectionFamily::measure(double t) const {
  auto k = std::lower_bound(sorted_w_.begin(), sorted_w_.end(), t) - sorted_w_.begin();
  return prefix_mu_[std::size_t(k)];
}

Section build_section(const PotentialState& state, const Point& x0, double t) {
  require(t > 0.0, ErrorKind::Parameter, "section height must be positive");
  return SectionFamily(state, x0).section(t);
}

Section dilate_section(const Section& s, double alpha, const PotentialState& state) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::Parameter, "dilation factor must lie in (0, 1]");
  const Grid& g = *s.grid;
  std::vector<Index> nodes;
  if (alpha == 1.0) {
    nodes.assign(s.nodes.begin(), s.nodes.end());
  } else {
    for (Index n : g.inside_nodes()) {
      Point p = g.position(n), q{0, 0, 0};
      for (int k = 0; k < g.dim(); ++k) q[k] = s.com[k] + (p[k] - s.com[k]) / alpha;
      if (s.nodes.contains(g.nearest_node(q))) nodes.push_back(n);
    }
  }
  Section d;
  d.grid = s.grid;
  d.x0 = s.x0;
  d.center_node = s.center_node;
  d.t = s.t;
  d.nodes = NodeSet(s.grid, std::move(nodes));
  finish(d, state);
  return d;
}

bool compactly_inside(const NodeSet& a, const NodeSet& b) {
  const Grid& g = *a.grid();
  for (Index n : a) {
    if (!b.contains(n)) return false;
    for (const Offset& o : g.axis_offsets()) {
      if (!b.contains(g.neighbor(n, o))) return false;
      if (!b.contains(g.neighbor(n, {-o[0], -o[1], -o[2]}))) return false;
    }
  }
  return true;
}

bool grid_convex(const NodeSet& s) {
  if (s.empty()) return true;
  const Grid& g = *s.grid();
  for (Index n : s) {
    for (const Offset& o : g.axis_offsets()) {
      // From the first node of each run, walk to its end, then make sure no
      // later node on the same line belongs to the set.
      Index prev = g.neighbor(n, {-o[0], -o[1], -o[2]});
      if (s.contains(prev)) continue;
      Index q = n;
      while (s.contains(q)) q = g.neighbor(q, o);
      for (; q >= 0; q = g.neighbor(q, o))
        if (s.contains(q)) return false;
    }
  }
  return true;
}

FitReport volume_growth_report(const PotentialState& state, const Point& x0, const std::vector<double>& heights) {
  SectionFamily fam(state, x0);
  const int n = state.dim();
  std::vector<std::pair<double, double>> pts;
  double rmin = 1e300, rmax = 0.0;
  for (double t : heights) {
    require(t > 0.0, ErrorKind::Parameter, "section height must be positive");
    if (t > fam.max_height()) continue;
    double v = fam.volume(t);
    pts.emplace_back(t, v);
    double r = v / std::pow(t, 0.5 * n);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  if (pts.size() < 4)
    fail(ErrorKind::InsufficientData, "volume growth needs at least 4 compactly contained heights, got " +
                                          std::to_string(pts.size()));
  FitReport r = fit_report("power", std::move(pts));
  r.extra["ratio_min"] = rmin;
  r.extra["ratio_max"] = rmax;
  return r;
}

DoublingParams doubling_report(const PotentialState& state, const Point& x0, const std::vector<double>& heights,
                               double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorKind::Parameter, "dilation factor must lie in (0, 1]");
  SectionFamily fam(state, x0);
  DoublingParams out;
  out.alpha = alpha;
  out.heights = heights;
  for (double t : heights) {
    require(t > 0.0, ErrorKind::Parameter, "section height must be positive");
    if (2.0 * t > fam.max_height())
      fail(ErrorKind::NotContained, "section of height " + std::to_string(2.0 * t) + " is not compactly contained");
    Section half = fam.section(0.5 * t);
    Section dil = dilate_section(half, alpha, state);
    if (dil.nodes.empty() || dil.mu <= 0.0) fail(ErrorKind::Degenerate, "dilated section is empty");
    out.beta = std::max(out.beta, fam.measure(t) / dil.mu);
    out.beta_prime = std::max(out.beta_prime, fam.measure(2.0 * t) / fam.measure(t));
  }
  return out;
}

}  // namespace malab
