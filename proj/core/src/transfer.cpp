#include "sedg/transfer.hpp"

#include <algorithm>
#include <stdexcept>

#include "sedg/interp.hpp"

namespace sedg {

namespace {

Eigen::VectorXd hat(const Interval& I, const std::vector<double>& x, int s) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) v(j) = s == 0 ? (I.b - x[j]) / I.length() : (x[j] - I.a) / I.length();
  return v;
}

// Rows of `coarse` points inside `fine`; both exact dyadic breakpoints of one family.
Eigen::MatrixXd selection(const std::vector<double>& fine, const std::vector<double>& coarse) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(coarse.size()), static_cast<Eigen::Index>(fine.size()));
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    auto it = std::lower_bound(fine.begin(), fine.end(), coarse[i]);
    if (it == fine.end() || *it != coarse[i]) throw std::logic_error("dyadic grids are not nested");
    s(static_cast<Eigen::Index>(i), it - fine.begin()) = 1.0;
  }
  return s;
}

std::vector<double> dyadic_points(const Interval& I, int p, const NestedDyadicFamily& family) {
  return family.at(p).mapped_to(I).breakpoint_values();
}

}  // namespace

Eigen::MatrixXd q_chain_1d(const Interval& I, int p, int q, int s, const NestedDyadicFamily& family) {
  const auto dp = dyadic_points(I, p, family);
  const auto dq = dyadic_points(I, q, family);
  const auto gp = build_lgl_rule(p, I).nodes;
  const auto gq = build_lgl_rule(q, I).nodes;
  const Eigen::MatrixXd restrict = selection(dp, dq) * hat(I, dp, s).asDiagonal();
  const Eigen::MatrixXd to_lgl = interp_grid_to_grid(dq, gq, InterpMode::kPiecewiseLinear);
  const Eigen::MatrixXd up = interp_grid_to_grid(gq, gp, InterpMode::kPolynomial);
  return up * to_lgl * restrict;
}

Eigen::MatrixXd qtilde_chain_1d(const Interval& I, int p, int q, int s, const NestedDyadicFamily& family) {
  const auto dp = dyadic_points(I, p, family);
  const auto dq = dyadic_points(I, q, family);
  const auto gp = build_lgl_rule(p, I).nodes;
  const auto gq = build_lgl_rule(q, I).nodes;
  const Eigen::MatrixXd down = interp_grid_to_grid(gp, gq, InterpMode::kPolynomial);
  const Eigen::MatrixXd localize = hat(I, gq, s).asDiagonal();
  const Eigen::MatrixXd to_dyadic = composite_K(gq, dq);
  const Eigen::MatrixXd refine = interp_grid_to_grid(dq, dp, InterpMode::kPiecewiseLinear);
  return refine * to_dyadic * localize * down;
}

std::vector<std::array<VertexLocalization, 4>> build_localizations(const Mesh& mesh) {
  const SharpSelection sharp = select_sharp_elements(mesh);
  std::vector<std::array<VertexLocalization, 4>> loc(mesh.patches().size());
  for (std::size_t r = 0; r < mesh.patches().size(); ++r) {
    for (int c = 0; c < 4; ++c) {
      const int s0 = c % 2, s1 = c / 2;
      // Edge parallel to axis 0 is the bottom/top side, parallel to axis 1 the left/right side.
      const int e0 = mesh.patch_edge(static_cast<int>(r), 2 + s1);
      const int e1 = mesh.patch_edge(static_cast<int>(r), s0);
      loc[r][c] = {c, {sharp.edge[e0].degree, sharp.edge[e1].degree}};
    }
  }
  return loc;
}

Transfer::Transfer(const DofMap& source, const DofMap& target, SparseMatrix matrix)
    : source_(&source), target_(&target), matrix_(std::move(matrix)) {}

Transfer::Transfer(const DofMap& source, const DofMap& target, std::vector<std::array<VertexTerm, 4>> terms)
    : source_(&source), target_(&target), terms_(std::move(terms)) {}

Eigen::VectorXd Transfer::apply_patch_local(int r, const Eigen::VectorXd& local) const {
  const auto& terms = terms_[r];
  Eigen::VectorXd y = Eigen::VectorXd::Zero(target_->lattice(r).size());
  for (const auto& t : terms) y += apply_kron2(t.factor0, t.factor1, local);
  return y;
}

Eigen::VectorXd Transfer::apply_patchwise(const Eigen::VectorXd& x) const {
  if (is_sparse()) {
    return target_->global_prolongation() * (matrix_ * x);
  }
  Eigen::VectorXd out(target_->num_nodes());
  for (int r = 0; r < source_->num_patches(); ++r) {
    const Eigen::VectorXd local = source_->prolongation(r) * x;
    out.segment(target_->node_offset(r), target_->lattice(r).size()) = apply_patch_local(r, local);
  }
  return out;
}

Eigen::VectorXd Transfer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != cols()) throw std::invalid_argument("Transfer::apply: dimension mismatch");
  if (is_sparse()) return matrix_ * x;
  Eigen::VectorXd y(rows());
  std::vector<Eigen::VectorXd> patch_out(source_->num_patches());
  std::vector<char> needed(source_->num_patches(), 0);
  for (int d = 0; d < target_->num_dofs(); ++d) needed[target_->info(d).home_patch] = 1;
  for (int r = 0; r < source_->num_patches(); ++r) {
    if (needed[r]) patch_out[r] = apply_patch_local(r, source_->prolongation(r) * x);
  }
  for (int d = 0; d < target_->num_dofs(); ++d) {
    const auto& info = target_->info(d);
    y(d) = patch_out[info.home_patch](info.home_node);
  }
  return y;
}

Eigen::VectorXd Transfer::apply_transpose(const Eigen::VectorXd& y) const {
  if (y.size() != rows()) throw std::invalid_argument("Transfer::apply_transpose: dimension mismatch");
  if (is_sparse()) return matrix_.transpose() * y;
  std::vector<Eigen::VectorXd> scatter(source_->num_patches());
  for (int r = 0; r < source_->num_patches(); ++r) scatter[r] = Eigen::VectorXd::Zero(target_->lattice(r).size());
  for (int d = 0; d < target_->num_dofs(); ++d) {
    const auto& info = target_->info(d);
    scatter[info.home_patch](info.home_node) += y(d);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(cols());
  for (int r = 0; r < source_->num_patches(); ++r) {
    if (scatter[r].isZero(0.0)) continue;
    Eigen::VectorXd local = Eigen::VectorXd::Zero(source_->lattice(r).size());
    for (const auto& t : terms_[r]) local += apply_kron2(t.factor0.transpose(), t.factor1.transpose(), scatter[r]);
    x += source_->prolongation(r).transpose() * local;
  }
  return x;
}

SparseMatrix Transfer::to_sparse() const {
  if (is_sparse()) return matrix_;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(cols());
  for (Eigen::Index j = 0; j < cols(); ++j) {
    e(j) = 1.0;
    const Eigen::VectorXd c = apply(e);
    e(j) = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (c(i) != 0.0) trips.emplace_back(static_cast<int>(i), static_cast<int>(j), c(i));
    }
  }
  SparseMatrix m(rows(), cols());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Transfer build_Qtilde_stage1(const Mesh& mesh, const DofMap& dg, const DofMap& secg) {
  if (dg.kind() != SpaceKind::kSeDg || secg.kind() != SpaceKind::kSeCg) {
    throw std::invalid_argument("build_Qtilde_stage1: expects SE-DG source and SE-CG target");
  }
  (void)mesh;
  std::vector<Eigen::Triplet<double>> trips;
  for (int d = 0; d < secg.num_dofs(); ++d) {
    const auto& info = secg.info(d);
    trips.emplace_back(d, dg.node_offset(info.home_patch) + info.home_node, 1.0);
  }
  SparseMatrix m(secg.num_dofs(), dg.num_dofs());
  m.setFromTriplets(trips.begin(), trips.end());
  return {dg, secg, std::move(m)};
}

namespace {

Transfer build_stage2(const Mesh& mesh, const DofMap& source, const DofMap& target, const NestedDyadicFamily& family,
                      bool to_spectral) {
  const auto loc = build_localizations(mesh);
  std::vector<std::array<Transfer::VertexTerm, 4>> terms(mesh.patches().size());
  for (std::size_t r = 0; r < mesh.patches().size(); ++r) {
    const Patch& p = mesh.patch(static_cast<int>(r));
    for (int c = 0; c < 4; ++c) {
      const std::array<int, 2> s{c % 2, c / 2};
      std::array<Eigen::MatrixXd, 2> f;
      for (int k = 0; k < 2; ++k) {
        const int q = loc[r][c].reduced_degree[k];
        f[k] = to_spectral ? q_chain_1d(p.box[k], p.degree[k], q, s[k], family)
                           : qtilde_chain_1d(p.box[k], p.degree[k], q, s[k], family);
      }
      terms[r][c] = {f[0], f[1]};
    }
  }
  return {source, target, std::move(terms)};
}

}  // namespace

Transfer build_Q_stage2(const Mesh& mesh, const DofMap& dfe, const DofMap& secg, const NestedDyadicFamily& family) {
  if (dfe.kind() != SpaceKind::kDfeCg || secg.kind() != SpaceKind::kSeCg) {
    throw std::invalid_argument("build_Q_stage2: expects DFE-CG source and SE-CG target");
  }
  return build_stage2(mesh, dfe, secg, family, true);
}

Transfer build_Qtilde_stage2(const Mesh& mesh, const DofMap& secg, const DofMap& dfe,
                             const NestedDyadicFamily& family) {
  if (dfe.kind() != SpaceKind::kDfeCg || secg.kind() != SpaceKind::kSeCg) {
    throw std::invalid_argument("build_Qtilde_stage2: expects SE-CG source and DFE-CG target");
  }
  return build_stage2(mesh, secg, dfe, family, false);
}

}  // namespace sedg
