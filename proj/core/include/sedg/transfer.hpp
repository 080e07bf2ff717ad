#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "sedg/mesh.hpp"
#include "sedg/space.hpp"

namespace sedg {

// Per patch and per vertex: Phi_z and the reduced degrees p*_z = (p#(E_0), p#(E_1)),
// E_k being the edge at z parallel to axis k.
struct VertexLocalization {
  int corner;
  std::array<int, 2> reduced_degree;
};

std::vector<std::array<VertexLocalization, 4>> build_localizations(const Mesh& mesh);

// Linear map between two DofMaps. Either an explicit sparse matrix or a sum of
// per-patch, per-vertex Kronecker products read off at the target home nodes.
// The DofMaps must outlive the operator.
class Transfer {
 public:
  struct VertexTerm {
    Eigen::MatrixXd factor0;  // acts along axis 0
    Eigen::MatrixXd factor1;  // acts along axis 1
  };

  Transfer(const DofMap& source, const DofMap& target, SparseMatrix matrix);
  Transfer(const DofMap& source, const DofMap& target, std::vector<std::array<VertexTerm, 4>> terms);

  const DofMap& source() const { return *source_; }
  const DofMap& target() const { return *target_; }
  Eigen::Index rows() const { return target_->num_dofs(); }
  Eigen::Index cols() const { return source_->num_dofs(); }
  bool is_sparse() const { return terms_.empty(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& y) const;

  // Per-patch target nodal values before reading off DOFs, stacked by node offset.
  Eigen::VectorXd apply_patchwise(const Eigen::VectorXd& x) const;

  // The operator applied to patch-local source nodal values of patch r (no interface coupling).
  Eigen::VectorXd apply_patch_local(int r, const Eigen::VectorXd& local) const;

  SparseMatrix to_sparse() const;

 private:
  const DofMap* source_;
  const DofMap* target_;
  SparseMatrix matrix_;
  std::vector<std::array<VertexTerm, 4>> terms_;
};

// Selection: vertex DOFs from R#(x), edge DOFs from R#(E), interior DOFs from their patch.
Transfer build_Qtilde_stage1(const Mesh& mesh, const DofMap& dg, const DofMap& secg);

// DFE-CG -> SE-CG.
Transfer build_Q_stage2(const Mesh& mesh, const DofMap& dfe, const DofMap& secg, const NestedDyadicFamily& family);

// SE-CG -> DFE-CG.
Transfer build_Qtilde_stage2(const Mesh& mesh, const DofMap& secg, const DofMap& dfe,
                             const NestedDyadicFamily& family);

// One-dimensional chains used by the stage-II operators; s selects the hat (0: left end, 1: right end).
Eigen::MatrixXd q_chain_1d(const Interval& I, int p, int q, int s, const NestedDyadicFamily& family);
Eigen::MatrixXd qtilde_chain_1d(const Interval& I, int p, int q, int s, const NestedDyadicFamily& family);

}  // namespace sedg
