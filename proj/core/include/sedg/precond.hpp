#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sedg/assembly.hpp"
#include "sedg/linalg.hpp"
#include "sedg/transfer.hpp"

namespace sedg {

class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// C = B^{-1} + S C_inner S^T for the stage-I pair (SE-DG, SE-CG).
class StageOnePreconditioner final : public LinearOperator {
 public:
  // `prolongation` maps SE-CG DOFs to SE-DG nodal values; `inner` approximates Ã_1^{-1} (may be null for S = 0).
  StageOnePreconditioner(const Eigen::VectorXd& b1_diagonal, SparseMatrix prolongation,
                         std::shared_ptr<const LinearOperator> inner);
  Eigen::Index size() const override { return b_inv_.size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override;

 private:
  DiagonalInverse b_inv_;
  SparseMatrix s_;
  std::shared_ptr<const LinearOperator> inner_;
};

// Interior chains (tridiagonal blocks) and skeleton of the SE-CG DOFs under B_2.
struct SubstructureOrdering {
  std::vector<std::vector<int>> chains;  // each chain is a path in the coupling graph, in path order
  std::vector<int> skeleton;            // vertex and edge DOFs, ascending
  int max_chain_length() const;
};

// Throws StructureError if an interior coupling component is not a path.
SubstructureOrdering build_substructure_ordering(const SparseMatrix& b2, const DofMap& secg);

// Substructuring solve: the interior chains are eliminated by Thomas steps, the resulting skeleton
// Schur complement is relaxed by `sweeps` symmetric Gauss-Seidel sweeps from zero, then the interiors
// are recovered. Exact when the skeleton is empty (a single patch with Dirichlet boundary).
class SubstructuredB2Solver final : public LinearOperator {
 public:
  SubstructuredB2Solver(const SparseMatrix& b2, SubstructureOrdering ordering, int sweeps);
  Eigen::Index size() const override { return b_.rows(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override;

  const SubstructureOrdering& ordering() const { return ordering_; }
  int sweeps() const { return sweeps_; }
  const Eigen::SparseMatrix<double, Eigen::RowMajor>& schur() const { return schur_; }
  // Floating point operations of one application (multiply-adds count two).
  long long flops_per_apply() const;

 private:
  void chain_solve(std::size_t c, std::vector<double>& y) const;  // in place, chain order
  void interior_solve(const Eigen::VectorXd& r, Eigen::VectorXd& x) const;

  Eigen::SparseMatrix<double, Eigen::RowMajor> b_;
  SubstructureOrdering ordering_;
  int sweeps_;
  std::vector<int> skeleton_pos_;  // -1 for interior DOFs
  Eigen::SparseMatrix<double, Eigen::RowMajor> schur_;
  // Thomas factors per chain: subdiagonal, modified superdiagonal and inverse pivots.
  std::vector<std::vector<double>> sub_, cprime_, inv_pivot_;
};

// C = C_B + Q C_inner Q^T for the stage-II pair (SE-CG, DFE-CG).
class StageTwoPreconditioner final : public LinearOperator {
 public:
  StageTwoPreconditioner(std::shared_ptr<const LinearOperator> b2_solver, std::shared_ptr<const Transfer> q,
                         std::shared_ptr<const LinearOperator> dfe_solver);
  Eigen::Index size() const override { return b2_->size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override;

 private:
  std::shared_ptr<const LinearOperator> b2_;
  std::shared_ptr<const Transfer> q_;
  std::shared_ptr<const LinearOperator> dfe_;
};

// m steps of Richardson x <- x + omega C (r - A x) from x = 0; symmetric when C is.
class RichardsonInner final : public LinearOperator {
 public:
  RichardsonInner(std::shared_ptr<const LinearOperator> a, std::shared_ptr<const LinearOperator> c, int steps,
                  double omega);
  Eigen::Index size() const override { return c_->size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override;

 private:
  std::shared_ptr<const LinearOperator> a_, c_;
  int steps_;
  double omega_;
};

// Applies A^{-1} by PCG to a fixed relative tolerance.
class PcgInverse final : public LinearOperator {
 public:
  PcgInverse(std::shared_ptr<const LinearOperator> a, std::shared_ptr<const LinearOperator> c, double tol, int max_it);
  Eigen::Index size() const override { return a_->size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const override;

 private:
  std::shared_ptr<const LinearOperator> a_, c_;
  double tol_;
  int max_it_;
};

enum class StageOneInner { kDirect, kStageTwo, kStageTwoPcg, kAuto };
enum class B2Mode { kExact, kSubstructured };

struct StackOptions {
  StageOneInner inner = StageOneInner::kAuto;
  B2Mode b2 = B2Mode::kExact;
  int sweeps = 7;
  int inner_iterations = 1;      // Richardson steps for kStageTwo
  double inner_tol = 1e-10;      // for kStageTwoPcg and kAuto above the direct limit
  int direct_limit = 20000;      // kAuto uses a direct solve up to this dimension
  StageOneWeights weights;
  double alpha = 1.2;
  double c_aspect = 2.0;
  double c_tune = 0.6;
  ReferenceRule dyadic_rule = ReferenceRule::kLargest;
};

struct StageTwoParts {
  std::shared_ptr<NestedDyadicFamily> family;
  std::shared_ptr<DofMap> dfe;
  std::shared_ptr<SparseMatrix> a2;  // DFE-CG stiffness
  std::shared_ptr<SparseMatrix> b2;
  std::shared_ptr<Transfer> q;
  std::shared_ptr<LinearOperator> b2_solver;
  std::shared_ptr<LinearOperator> preconditioner;  // approximates Ã_1^{-1}
};

// Builds everything stage II needs on top of an SE-CG space.
StageTwoParts build_stage_two(const Mesh& mesh, const DofMap& secg, const StackOptions& options);

struct PreconditionerStack {
  std::shared_ptr<DofMap> dg;
  std::shared_ptr<DofMap> secg;
  std::shared_ptr<SparseMatrix> a;   // DG-NI
  std::shared_ptr<SparseMatrix> a1;  // SE-CG stiffness
  Eigen::VectorXd b1;
  StageTwoParts stage_two;           // empty when stage I uses a direct inner solve
  std::shared_ptr<LinearOperator> inner;
  std::shared_ptr<LinearOperator> preconditioner;  // acts on SE-DG
};

PreconditionerStack compose_two_stage(const Mesh& mesh, const StackOptions& options);

}  // namespace sedg
