#include "sedg/precond.hpp"

#include <algorithm>
#include <sstream>

#include "sedg/krylov.hpp"

namespace sedg {

StageOnePreconditioner::StageOnePreconditioner(const Eigen::VectorXd& b1_diagonal, SparseMatrix prolongation,
                                               std::shared_ptr<const LinearOperator> inner)
    : b_inv_(b1_diagonal), s_(std::move(prolongation)), inner_(std::move(inner)) {
  if (s_.rows() != b1_diagonal.size()) throw ConfigurationError("stage I: prolongation does not match the SE-DG space");
  if (inner_ && inner_->size() != s_.cols()) throw ConfigurationError("stage I: inner solver does not match SE-CG");
}

Eigen::VectorXd StageOnePreconditioner::apply(const Eigen::VectorXd& r) const {
  Eigen::VectorXd y = b_inv_.apply(r);
  if (inner_ && s_.nonZeros() > 0) {
    const Eigen::VectorXd coarse = s_.transpose() * r;
    y += s_ * inner_->apply(coarse);
  }
  return y;
}

int SubstructureOrdering::max_chain_length() const {
  std::size_t m = 0;
  for (const auto& c : chains) m = std::max(m, c.size());
  return static_cast<int>(m);
}

SubstructureOrdering build_substructure_ordering(const SparseMatrix& b2, const DofMap& secg) {
  const int n = secg.num_dofs();
  if (b2.rows() != n) throw ConfigurationError("substructure ordering: B_2 does not match SE-CG");
  std::vector<char> interior(n, 0);
  for (int d = 0; d < n; ++d) interior[d] = secg.info(d).role == DofRole::kInterior;

  std::vector<std::vector<int>> adj(n);
  for (int c = 0; c < b2.outerSize(); ++c) {
    if (!interior[c]) continue;
    for (SparseMatrix::InnerIterator it(b2, c); it; ++it) {
      const int i = static_cast<int>(it.row());
      if (i == c || !interior[i] || it.value() == 0.0) continue;
      if (secg.info(i).entity != secg.info(c).entity) {
        std::ostringstream msg;
        msg << "interior DOFs " << i << " and " << c << " of different patches couple";
        throw StructureError(msg.str());
      }
      adj[c].push_back(i);
    }
  }
  for (int d = 0; d < n; ++d) {
    if (adj[d].size() > 2) {
      std::ostringstream msg;
      msg << "interior DOF " << d << " couples to " << adj[d].size() << " interior DOFs (entry (" << d << ", "
          << adj[d][2] << ") leaves the tridiagonal band)";
      throw StructureError(msg.str());
    }
  }

  SubstructureOrdering ord;
  std::vector<char> seen(n, 0);
  for (int d = 0; d < n; ++d) {
    if (!interior[d] || seen[d] || adj[d].size() == 2) continue;
    std::vector<int> chain{d};
    seen[d] = 1;
    int prev = -1, cur = d;
    for (;;) {
      int next = -1;
      for (int j : adj[cur]) {
        if (j != prev) next = j;
      }
      if (next < 0) break;
      chain.push_back(next);
      seen[next] = 1;
      prev = cur;
      cur = next;
    }
    ord.chains.push_back(std::move(chain));
  }
  for (int d = 0; d < n; ++d) {
    if (interior[d] && !seen[d]) {
      std::ostringstream msg;
      msg << "interior DOF " << d << " lies on a cycle of the coupling graph";
      throw StructureError(msg.str());
    }
    if (!interior[d]) ord.skeleton.push_back(d);
  }
  return ord;
}

SubstructuredB2Solver::SubstructuredB2Solver(const SparseMatrix& b2, SubstructureOrdering ordering, int sweeps)
    : b_(b2), ordering_(std::move(ordering)), sweeps_(sweeps) {
  if (sweeps < 1) throw ConfigurationError("substructured smoother needs at least one sweep");
  const Eigen::VectorXd diag = b2.diagonal();
  for (const auto& chain : ordering_.chains) {
    const std::size_t m = chain.size();
    std::vector<double> a(m, 0.0), cp(m, 0.0), ip(m, 0.0);
    double prev_cp = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k > 0) a[k] = b2.coeff(chain[k], chain[k - 1]);
      const double c = k + 1 < m ? b2.coeff(chain[k], chain[k + 1]) : 0.0;
      const double pivot = diag(chain[k]) - a[k] * prev_cp;
      if (!(pivot > 0.0)) throw std::runtime_error("Thomas elimination: non-positive pivot");
      ip[k] = 1.0 / pivot;
      cp[k] = c * ip[k];
      prev_cp = cp[k];
    }
    sub_.push_back(std::move(a));
    cprime_.push_back(std::move(cp));
    inv_pivot_.push_back(std::move(ip));
  }

  const auto& sk = ordering_.skeleton;
  skeleton_pos_.assign(b_.rows(), -1);
  for (std::size_t k = 0; k < sk.size(); ++k) skeleton_pos_[sk[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i : sk) {
    for (decltype(b_)::InnerIterator it(b_, i); it; ++it) {
      const int j = skeleton_pos_[it.col()];
      if (j >= 0) trips.emplace_back(skeleton_pos_[i], j, it.value());
    }
  }
  // S -= B_SI T^{-1} B_IS, one chain at a time; a chain only reaches the skeleton DOFs next to it.
  std::vector<double> y;
  for (std::size_t c = 0; c < ordering_.chains.size(); ++c) {
    const auto& chain = ordering_.chains[c];
    const std::size_t m = chain.size();
    std::vector<int> near;
    for (int i : chain) {
      for (decltype(b_)::InnerIterator it(b_, i); it; ++it) {
        if (skeleton_pos_[it.col()] >= 0) near.push_back(static_cast<int>(it.col()));
      }
    }
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end()), near.end());
    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(near.size()));
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t q = 0; q < near.size(); ++q) coupling(k, q) = b_.coeff(chain[k], near[q]);
    }
    for (std::size_t q = 0; q < near.size(); ++q) {
      y.assign(coupling.col(q).data(), coupling.col(q).data() + m);
      chain_solve(c, y);
      for (std::size_t t = 0; t < near.size(); ++t) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += coupling(k, t) * y[k];
        if (s != 0.0) trips.emplace_back(skeleton_pos_[near[t]], skeleton_pos_[near[q]], -s);
      }
    }
  }
  schur_.resize(static_cast<Eigen::Index>(sk.size()), static_cast<Eigen::Index>(sk.size()));
  schur_.setFromTriplets(trips.begin(), trips.end());
  schur_ = 0.5 * (Eigen::SparseMatrix<double, Eigen::RowMajor>(schur_.transpose()) + schur_);
  for (Eigen::Index i = 0; i < schur_.rows(); ++i) {
    if (!(schur_.coeff(i, i) > 0.0)) throw std::runtime_error("skeleton Schur complement: non-positive diagonal");
  }
}

void SubstructuredB2Solver::chain_solve(std::size_t c, std::vector<double>& y) const {
  const std::size_t m = y.size();
  for (std::size_t k = 0; k < m; ++k) y[k] = (y[k] - (k > 0 ? sub_[c][k] * y[k - 1] : 0.0)) * inv_pivot_[c][k];
  for (std::size_t k = m - 1; k-- > 0;) y[k] -= cprime_[c][k] * y[k + 1];
}

// x_I = T^{-1} (r_I - B_IS x_S), reading the skeleton part of x.
void SubstructuredB2Solver::interior_solve(const Eigen::VectorXd& r, Eigen::VectorXd& x) const {
  std::vector<double> y;
  for (std::size_t c = 0; c < ordering_.chains.size(); ++c) {
    const auto& chain = ordering_.chains[c];
    y.resize(chain.size());
    for (std::size_t k = 0; k < chain.size(); ++k) {
      double rhs = r(chain[k]);
      for (decltype(b_)::InnerIterator it(b_, chain[k]); it; ++it) {
        if (skeleton_pos_[it.col()] >= 0) rhs -= it.value() * x(it.col());
      }
      y[k] = rhs;
    }
    chain_solve(c, y);
    for (std::size_t k = 0; k < chain.size(); ++k) x(chain[k]) = y[k];
  }
}

Eigen::VectorXd SubstructuredB2Solver::apply(const Eigen::VectorXd& r) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(r.size());
  const auto& sk = ordering_.skeleton;
  if (sk.empty()) {
    interior_solve(r, x);
    return x;
  }
  // Condensed right-hand side g = r_S - B_SI T^{-1} r_I.
  interior_solve(r, x);
  Eigen::VectorXd g(static_cast<Eigen::Index>(sk.size()));
  for (std::size_t k = 0; k < sk.size(); ++k) {
    double s = r(sk[k]);
    for (decltype(b_)::InnerIterator it(b_, sk[k]); it; ++it) {
      if (skeleton_pos_[it.col()] < 0) s -= it.value() * x(it.col());
    }
    g(static_cast<Eigen::Index>(k)) = s;
  }
  Eigen::VectorXd xs = Eigen::VectorXd::Zero(g.size());
  auto relax = [&](Eigen::Index i) {
    double s = g(i), d = 0.0;
    for (decltype(schur_)::InnerIterator it(schur_, i); it; ++it) {
      if (it.col() == i) {
        d = it.value();
      } else {
        s -= it.value() * xs(it.col());
      }
    }
    xs(i) = s / d;
  };
  for (int s = 0; s < sweeps_; ++s) {
    for (Eigen::Index i = 0; i < xs.size(); ++i) relax(i);
    for (Eigen::Index i = xs.size(); i-- > 0;) relax(i);
  }
  for (std::size_t k = 0; k < sk.size(); ++k) x(sk[k]) = xs(static_cast<Eigen::Index>(k));
  interior_solve(r, x);
  return x;
}

long long SubstructuredB2Solver::flops_per_apply() const {
  long long interior = 0;
  for (const auto& chain : ordering_.chains) {
    for (int i : chain) interior += 2LL * b_.row(i).nonZeros() + 6;
  }
  long long skeleton = 0;
  for (int i : ordering_.skeleton) skeleton += 2LL * b_.row(i).nonZeros();
  return 2 * interior + skeleton + 4LL * sweeps_ * schur_.nonZeros();
}

StageTwoPreconditioner::StageTwoPreconditioner(std::shared_ptr<const LinearOperator> b2_solver,
                                               std::shared_ptr<const Transfer> q,
                                               std::shared_ptr<const LinearOperator> dfe_solver)
    : b2_(std::move(b2_solver)), q_(std::move(q)), dfe_(std::move(dfe_solver)) {
  if (q_->rows() != b2_->size() || q_->cols() != dfe_->size()) {
    throw ConfigurationError("stage II: transfer does not match the spaces");
  }
}

Eigen::VectorXd StageTwoPreconditioner::apply(const Eigen::VectorXd& r) const {
  Eigen::VectorXd y = b2_->apply(r);
  y += q_->apply(dfe_->apply(q_->apply_transpose(r)));
  return y;
}

RichardsonInner::RichardsonInner(std::shared_ptr<const LinearOperator> a, std::shared_ptr<const LinearOperator> c,
                                 int steps, double omega)
    : a_(std::move(a)), c_(std::move(c)), steps_(steps), omega_(omega) {
  if (steps < 1) throw ConfigurationError("inner iteration count must be at least one");
}

Eigen::VectorXd RichardsonInner::apply(const Eigen::VectorXd& r) const {
  Eigen::VectorXd x = omega_ * c_->apply(r);
  for (int s = 1; s < steps_; ++s) x += omega_ * c_->apply(r - a_->apply(x));
  return x;
}

PcgInverse::PcgInverse(std::shared_ptr<const LinearOperator> a, std::shared_ptr<const LinearOperator> c, double tol,
                       int max_it)
    : a_(std::move(a)), c_(std::move(c)), tol_(tol), max_it_(max_it) {}

Eigen::VectorXd PcgInverse::apply(const Eigen::VectorXd& r) const { return pcg(*a_, *c_, r, tol_, max_it_).x; }

StageTwoParts build_stage_two(const Mesh& mesh, const DofMap& secg, const StackOptions& options) {
  StageTwoParts parts;
  parts.family = std::make_shared<NestedDyadicFamily>(
      build_nested_family(mesh.max_degree(), Interval(-1.0, 1.0), options.alpha, options.dyadic_rule));
  parts.dfe = std::make_shared<DofMap>(build_dofmap(mesh, SpaceKind::kDfeCg, parts.family.get()));
  parts.a2 = std::make_shared<SparseMatrix>(assemble_conforming(mesh, *parts.dfe));
  parts.b2 = std::make_shared<SparseMatrix>(
      assemble_b2(secg, classify_anisotropy(secg, options.c_aspect), options.c_tune));
  parts.q = std::make_shared<Transfer>(build_Q_stage2(mesh, *parts.dfe, secg, *parts.family));
  if (options.b2 == B2Mode::kExact) {
    parts.b2_solver = std::make_shared<DirectSolver>(*parts.b2);
  } else {
    parts.b2_solver = std::make_shared<SubstructuredB2Solver>(
        *parts.b2, build_substructure_ordering(*parts.b2, secg), options.sweeps);
  }
  parts.preconditioner =
      std::make_shared<StageTwoPreconditioner>(parts.b2_solver, parts.q, std::make_shared<DirectSolver>(*parts.a2));
  return parts;
}

PreconditionerStack compose_two_stage(const Mesh& mesh, const StackOptions& options) {
  if (options.inner_iterations < 1) throw ConfigurationError("inner iteration count must be at least one");
  PreconditionerStack st;
  st.dg = std::make_shared<DofMap>(build_dofmap(mesh, SpaceKind::kSeDg));
  st.secg = std::make_shared<DofMap>(build_dofmap(mesh, SpaceKind::kSeCg));
  st.a = std::make_shared<SparseMatrix>(assemble_dg_ni(mesh, *st.dg, options.weights.gamma));
  st.a1 = std::make_shared<SparseMatrix>(assemble_conforming(mesh, *st.secg));
  st.b1 = assemble_b1_diagonal(mesh, *st.dg, options.weights);

  StageOneInner mode = options.inner;
  if (mode == StageOneInner::kAuto) {
    mode = st.a1->rows() <= options.direct_limit ? StageOneInner::kDirect : StageOneInner::kStageTwoPcg;
  }
  if (mode == StageOneInner::kDirect) {
    st.inner = std::make_shared<DirectSolver>(*st.a1);
  } else {
    st.stage_two = build_stage_two(mesh, *st.secg, options);
    auto a1_op = std::make_shared<MatrixOperator>(*st.a1);
    if (mode == StageOneInner::kStageTwoPcg) {
      st.inner = std::make_shared<PcgInverse>(a1_op, st.stage_two.preconditioner, options.inner_tol, 2000);
    } else if (options.inner_iterations == 1) {
      st.inner = st.stage_two.preconditioner;
    } else {
      const SpectrumEstimate est = estimate_condition(*a1_op, *st.stage_two.preconditioner, 1e-3, 200);
      st.inner = std::make_shared<RichardsonInner>(a1_op, st.stage_two.preconditioner, options.inner_iterations,
                                                   2.0 / (est.lambda_min + est.lambda_max));
    }
  }
  st.preconditioner = std::make_shared<StageOnePreconditioner>(st.b1, st.secg->global_prolongation(), st.inner);
  return st;
}

}  // namespace sedg
