#include "malab/operator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "malab/error.hpp"
#include "stencil.hpp"

namespace malab {

namespace {

constexpr double kMinTheta = 1e-3;

double cut_theta(const Region& r, Index p, Index q) {
  if (!r.has_level()) return 1.0;
  double lp = r.level[p], lq = r.level[q];
  if (!std::isfinite(lp) || !std::isfinite(lq) || lp >= 0.0 || lq < 0.0) return 1.0;
  return std::clamp(lp / (lp - lq), kMinTheta, 1.0);
}

}  // namespace

Region Region::of_domain(const GridPtr& grid, const ConvexDomain& domain) {
  require(domain.dim() == grid->dim(), ErrorKind::Dimension, "region and grid dimensions differ");
  Region r;
  r.level = ScalarField::sample(grid, [&](const Point& x) { return domain.level(x); }, true);
  r.nodes = NodeSet::from_predicate(grid, [&](Index n) { return r.level[n] < 0.0; });
  return r;
}

Region Region::sublevel(const ScalarField& w, double t) {
  const GridPtr& grid = w.grid_ptr();
  Region r;
  r.level = ScalarField(grid);
  for (Index n = 0; n < static_cast<Index>(grid->size()); ++n)
    if (w.defined(n)) r.level[n] = w[n] - t;
  r.nodes = NodeSet::from_predicate(grid, [&](Index n) { return w.defined(n) && w[n] < t; });
  return r;
}

Region Region::shell(const ScalarField& w, double a, double b) {
  require(a < b, ErrorKind::Parameter, "shell needs inner height below outer height");
  const GridPtr& grid = w.grid_ptr();
  Region r;
  r.level = ScalarField(grid);
  for (Index n = 0; n < static_cast<Index>(grid->size()); ++n)
    if (w.defined(n)) r.level[n] = std::max(w[n] - b, a - w[n]);
  r.nodes = NodeSet::from_predicate(grid, [&](Index n) { return w.defined(n) && w[n] >= a && w[n] < b; });
  return r;
}

Region Region::superlevel(const ScalarField& g, double s) {
  const GridPtr& grid = g.grid_ptr();
  Region r;
  r.level = ScalarField(grid);
  for (Index n = 0; n < static_cast<Index>(grid->size()); ++n)
    if (g.defined(n)) r.level[n] = s - g[n];
  r.nodes = NodeSet::from_predicate(grid, [&](Index n) { return g.defined(n) && g[n] > s; });
  return r;
}

Region Region::of_nodes(NodeSet nodes) {
  Region r;
  r.nodes = std::move(nodes);
  return r;
}

LinearizedOperator::LinearizedOperator(const PotentialState& state, Region region)
    : state_(&state), region_(std::move(region)) {
  const Grid& g = state.g();
  const int dim = g.dim();
  require(region_.nodes.grid().get() == &g || region_.nodes.grid() == state.grid || region_.nodes.empty(),
          ErrorKind::Misuse, "region built on a different grid");
  require(!region_.nodes.empty(), ErrorKind::Domain, "operator region is empty");
  auto offsets = g.stencil_offsets();
  ndirs_ = static_cast<int>(offsets.size());
  for (const auto& o : offsets) length2_.push_back(offset_norm(o) * offset_norm(o) * g.h() * g.h());

  local_.assign(g.size(), -1);
  int k = 0;
  for (Index n : region_.nodes) {
    if (!g.inside(n)) fail(ErrorKind::Domain, "operator region leaves the domain at node " + std::to_string(n));
    local_[n] = k++;
  }
  stats_.unknowns = region_.nodes.size();

  // Node weights from U.
  weights_.assign(region_.nodes.size() * ndirs_, 0.0);
  for (Index n : region_.nodes) {
    Mat3 U = state.cofactor.at(n);
    double scale = std::max(U.cwiseAbs().maxCoeff(), 1e-300);
    double emin = detail::min_eigenvalue(U, dim);
    if (emin < -1e-8 * scale || !(scale > 1e-300) || !std::isfinite(emin)) {
      Point p = g.position(n);
      fail(ErrorKind::Assembly, "cofactor matrix not positive definite at node " + std::to_string(n) + " (" +
                                    std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", " +
                                    std::to_string(p[2]) + "), min eigenvalue " + std::to_string(emin));
    }
    double* w = &weights_[std::size_t(local_[n]) * ndirs_];
    bool lump = false;
    for (int a = 0; a < dim; ++a) {
      double off = 0.0;
      for (int b = 0; b < dim; ++b)
        if (b != a) off += std::abs(U(a, b));
      w[a] = U(a, a) - off;
      if (w[a] < -1e-12 * scale) lump = true;
    }
    if (lump) {
      ++stats_.lumped_nodes;
      for (int a = 0; a < dim; ++a) w[a] = U(a, a);
      continue;
    }
    for (int a = 0; a < dim; ++a) w[a] = std::max(w[a], 0.0);
    int dir = dim;
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j, dir += 2) {
        w[dir] = 2.0 * std::max(U(i, j), 0.0);
        w[dir + 1] = 2.0 * std::max(-U(i, j), 0.0);
      }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(region_.nodes.size() * (2 * ndirs_ + 1));
  std::vector<double> diag(region_.nodes.size(), 0.0);
  for (Index n : region_.nodes) {
    int i = local_[n];
    for (int d = 0; d < ndirs_; ++d) {
      const Offset& o = offsets[d];
      double wn = node_weight(n, d);
      Index fwd = g.neighbor(n, o);
      Index bwd = g.neighbor(n, {-o[0], -o[1], -o[2]});
      if (fwd >= 0 && local_[fwd] >= 0) {
        double c = 0.5 * (wn + node_weight(fwd, d)) / length2_[d];
        if (c != 0.0) {
          int j = local_[fwd];
          trip.emplace_back(i, j, -c);
          trip.emplace_back(j, i, -c);
          diag[i] += c;
          diag[j] += c;
        }
      }
      for (Index q : {fwd, bwd}) {
        if (q >= 0 && local_[q] >= 0) continue;
        if (wn == 0.0) continue;
        double theta = q >= 0 ? cut_theta(region_, n, q) : 1.0;
        if (theta < 1.0) ++stats_.cut_edges;
        diag[i] += wn / (theta * length2_[d]);
      }
    }
  }
  for (std::size_t i = 0; i < diag.size(); ++i) trip.emplace_back(int(i), int(i), diag[i]);
  A_.resize(Eigen::Index(size()), Eigen::Index(size()));
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
}

double LinearizedOperator::node_weight(Index node, int dir) const {
  int i = local_[node];
  if (i < 0) return 0.0;
  return weights_[std::size_t(i) * ndirs_ + dir];
}

template <class F>
void LinearizedOperator::for_each_boundary_edge(F&& fn) const {
  const Grid& g = grid();
  auto offsets = g.stencil_offsets();
  for (Index n : region_.nodes) {
    for (int d = 0; d < ndirs_; ++d) {
      double wn = node_weight(n, d);
      if (wn == 0.0) continue;
      const Offset& o = offsets[d];
      for (int s : {1, -1}) {
        Index q = g.neighbor(n, {s * o[0], s * o[1], s * o[2]});
        if (q >= 0 && local_[q] >= 0) continue;
        double theta = q >= 0 ? cut_theta(region_, n, q) : 1.0;
        fn(n, Edge{d, q, theta, wn / (theta * length2_[d])});
      }
    }
  }
}

double LinearizedOperator::quadratic_form(const ScalarField& v) const {
  Eigen::VectorXd x = from_field(v);
  return grid().cell_volume() * x.dot(A_ * x);
}

std::vector<double> LinearizedOperator::energy_breakdown(const ScalarField& v, const ScalarField* boundary) const {
  const Grid& g = grid();
  auto offsets = g.stencil_offsets();
  std::vector<double> out(ndirs_, 0.0);
  for (Index n : region_.nodes) {
    for (int d = 0; d < ndirs_; ++d) {
      Index q = g.neighbor(n, offsets[d]);
      if (q < 0 || local_[q] < 0) continue;
      double c = 0.5 * (node_weight(n, d) + node_weight(q, d)) / length2_[d];
      double diff = v[n] - v[q];
      out[d] += c * diff * diff;
    }
  }
  for_each_boundary_edge([&](Index n, const Edge& e) {
    double b = (boundary && e.q >= 0 && boundary->defined(e.q)) ? (*boundary)[e.q] : 0.0;
    out[e.dir] += e.coef * (v[n] - b) * (v[n] - b);
  });
  for (double& x : out) x *= g.cell_volume();
  return out;
}

Eigen::VectorXd LinearizedOperator::boundary_rhs(const ScalarField& boundary) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(size()));
  for_each_boundary_edge([&](Index n, const Edge& e) {
    if (e.q >= 0 && boundary.defined(e.q)) b[local_[n]] += e.coef * boundary[e.q];
  });
  return b;
}

ScalarField LinearizedOperator::to_field(const Eigen::VectorXd& x) const {
  ScalarField f(state_->grid);
  for (Index n : grid().inside_nodes()) f[n] = 0.0;
  for (Index n : region_.nodes) f[n] = x[local_[n]];
  return f;
}

Eigen::VectorXd LinearizedOperator::from_field(const ScalarField& v) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(size()));
  for (Index n : region_.nodes) {
    require(v.defined(n), ErrorKind::Domain, "field undefined on the operator region");
    x[local_[n]] = v[n];
  }
  return x;
}

struct SpdSolver::Impl {
  double tol = 1e-10;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt;
  std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                           Eigen::IncompleteCholesky<double>>>
      cg;
};

SpdSolver::SpdSolver(const SparseMatrix& A, int dim, double rel_tol) : impl_(std::make_unique<Impl>()) {
  impl_->tol = rel_tol;
  if (dim == 2 || A.rows() < 20000) {
    impl_->ldlt = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(A);
    if (impl_->ldlt->info() != Eigen::Success) throw SolverFailure("LDLT factorization failed", -1.0, 0);
  } else {
    impl_->cg = std::make_unique<std::remove_reference_t<decltype(*impl_->cg)>>();
    impl_->cg->setTolerance(rel_tol);
    impl_->cg->setMaxIterations(std::max<Eigen::Index>(1000, A.rows() / 10));
    impl_->cg->compute(A);
    if (impl_->cg->info() != Eigen::Success) throw SolverFailure("incomplete Cholesky failed", -1.0, 0);
  }
}

SpdSolver::~SpdSolver() = default;

bool SpdSolver::direct() const { return impl_->ldlt != nullptr; }

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  if (impl_->ldlt) {
    Eigen::VectorXd x = impl_->ldlt->solve(b);
    last_iterations_ = 0;
    last_error_ = 0.0;
    return x;
  }
  Eigen::VectorXd x = impl_->cg->solve(b);
  last_iterations_ = int(impl_->cg->iterations());
  last_error_ = impl_->cg->error();
  if (impl_->cg->info() != Eigen::Success && last_error_ > impl_->tol)
    throw SolverFailure("conjugate gradient stagnated", last_error_, last_iterations_);
  return x;
}

ScalarField solve_dirichlet(const LinearizedOperator& op, const NodeSet& free, const ScalarField& fixed_values,
                            const ScalarField* boundary, double rel_tol) {
  const Grid& g = op.grid();
  const SparseMatrix& A = op.matrix();
  const auto nodes = op.nodes().nodes();
  std::vector<int> fidx(nodes.size(), -1);
  int nf = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (free.contains(nodes[i])) fidx[i] = nf++;
  require(nf > 0, ErrorKind::Parameter, "no free nodes in the Dirichlet problem");

  Eigen::VectorXd xfix = Eigen::VectorXd::Zero(Eigen::Index(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (fidx[i] < 0) {
      require(fixed_values.defined(nodes[i]), ErrorKind::Domain, "fixed value undefined");
      xfix[Eigen::Index(i)] = fixed_values[nodes[i]];
    }
  Eigen::VectorXd rhs_all = boundary ? op.boundary_rhs(*boundary) : Eigen::VectorXd::Zero(A.rows());
  rhs_all -= A * xfix;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(nf);
  for (Eigen::Index c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
      int i = fidx[it.row()], j = fidx[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (fidx[i] >= 0) rhs[fidx[i]] = rhs_all[Eigen::Index(i)];
  SparseMatrix Aff(nf, nf);
  Aff.setFromTriplets(trip.begin(), trip.end());
  SpdSolver solver(Aff, g.dim(), rel_tol);
  Eigen::VectorXd xf = solver.solve(rhs);

  ScalarField out(op.state().grid);
  for (Index n : g.inside_nodes()) out[n] = (boundary && boundary->defined(n)) ? (*boundary)[n] : 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) out[nodes[i]] = fidx[i] >= 0 ? xf[fidx[i]] : xfix[Eigen::Index(i)];
  return out;
}

}  // namespace malab
