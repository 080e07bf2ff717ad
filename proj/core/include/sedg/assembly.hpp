#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "sedg/mesh.hpp"
#include "sedg/space.hpp"

namespace sedg {

enum class FormMode { kExact, kNi };

// Symmetric interior penalty form with LGL quadrature on elements and on the
// max-degree face grids.
SparseMatrix assemble_dg_ni(const Mesh& mesh, const DofMap& dg, double gamma);

// Element gradients plus penalty jumps, without consistency terms.
SparseMatrix assemble_reduced(const Mesh& mesh, const DofMap& dg, double gamma, FormMode mode);

// Gramian of the DG norm |v|_1^2 + gamma sum_F omega_F ||[v]||^2 (exact integrals).
inline SparseMatrix dg_norm_gramian(const Mesh& mesh, const DofMap& dg, double gamma) {
  return assemble_reduced(mesh, dg, gamma, FormMode::kExact);
}

// Block-diagonal element stiffness under each patch's own LGL quadrature.
SparseMatrix assemble_element_stiffness(const Mesh& mesh, const DofMap& dg);

struct StageOneWeights {
  double beta1 = 0.15;
  double rho1 = 1.25;
  double c1sq = 10.0;
  double gamma = 3.0;
};

// W_xi = (sum_k w_{xi,k}^{-2}) w_xi at every SE-DG node.
Eigen::VectorXd stage_one_node_weights(const Mesh& mesh, const DofMap& dg);

// Diagonal of B_1.
Eigen::VectorXd assemble_b1_diagonal(const Mesh& mesh, const DofMap& dg, const StageOneWeights& weights);
SparseMatrix assemble_b1(const Mesh& mesh, const DofMap& dg, const StageOneWeights& weights);

// Gradient stiffness on SE-CG (LGL quadrature) or DFE-CG (exact Q1 cell integrals).
SparseMatrix assemble_conforming(const Mesh& mesh, const DofMap& space);

// Per-patch local stiffness on the lattice of `space`, before interface constraints.
SparseMatrix patch_conforming_stiffness(const PatchLattice& lattice, SpaceKind kind);

struct AnisotropyClassification {
  double c_aspect = 2.0;
  // anisotropic[r][k][i + (n0 - 1) j] for cell (i, j) of patch r.
  std::vector<std::array<std::vector<char>, 2>> anisotropic;
};

AnisotropyClassification classify_anisotropy(const DofMap& secg, double c_aspect);

// Patch-local B_R on the LGL lattice.
SparseMatrix patch_b2(const PatchLattice& lattice, const std::array<std::vector<char>, 2>& anisotropic,
                      double c_tune);

SparseMatrix assemble_b2(const DofMap& secg, const AnisotropyClassification& classification, double c_tune);

Eigen::VectorXd assemble_rhs_ni(const Mesh& mesh, const DofMap& dg, const std::function<double(double, double)>& f);

// sum_r P_r^T K_r P_r for patch-local matrices on `space`'s lattices.
SparseMatrix galerkin_sum(const DofMap& space, const std::vector<SparseMatrix>& local);

void write_matrix_market(const std::string& path, const SparseMatrix& matrix);

}  // namespace sedg
