#pragma once

#include <array>
#include <vector>

#include <Eigen/Sparse>

#include "sedg/grid.hpp"
#include "sedg/interp.hpp"
#include "sedg/mesh.hpp"

namespace sedg {

using SparseMatrix = Eigen::SparseMatrix<double>;
using RowSparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class SpaceKind { kSeDg, kSeCg, kDfeCg };

// Tensor node lattice of one patch; node (i, j) has local index i + n0 j.
struct PatchLattice {
  std::array<std::vector<double>, 2> coords;
  int n(int k) const { return static_cast<int>(coords[k].size()); }
  int size() const { return n(0) * n(1); }
  int index(int i, int j) const { return i + n(0) * j; }
};

enum class DofRole { kInterior, kEdge, kVertex };

struct DofInfo {
  DofRole role;
  int entity;      // patch, edge or vertex id
  int home_patch;  // patch whose local node carries this value with coefficient 1
  int home_node;
};

class DofMap {
 public:
  SpaceKind kind() const { return kind_; }
  int num_dofs() const { return static_cast<int>(info_.size()); }
  int num_patches() const { return static_cast<int>(lattice_.size()); }
  const PatchLattice& lattice(int r) const { return lattice_[r]; }
  const DofInfo& info(int dof) const { return info_[dof]; }

  // Patch nodal values from global DOFs: rows = lattice nodes of patch r.
  const RowSparseMatrix& prolongation(int r) const { return prolong_[r]; }

  // Offset of patch r in the stacked (discontinuous) nodal vector.
  int node_offset(int r) const { return offset_[r]; }
  int num_nodes() const { return offset_.back(); }

  // Stacked prolongation: all patch nodal values from global DOFs.
  SparseMatrix global_prolongation() const;

  // Reads global DOF values from stacked patch nodal values at the home nodes.
  Eigen::VectorXd restrict_home(const Eigen::VectorXd& stacked) const;

  InterpMode trace_mode() const {
    return kind_ == SpaceKind::kDfeCg ? InterpMode::kPiecewiseLinear : InterpMode::kPolynomial;
  }

 private:
  friend DofMap build_dofmap(const Mesh&, SpaceKind, const NestedDyadicFamily*);
  SpaceKind kind_ = SpaceKind::kSeDg;
  std::vector<PatchLattice> lattice_;
  std::vector<RowSparseMatrix> prolong_;
  std::vector<int> offset_;
  std::vector<DofInfo> info_;
};

// `family` (built on [-1, 1]) is required for DFE-CG and must cover the largest degree.
DofMap build_dofmap(const Mesh& mesh, SpaceKind kind, const NestedDyadicFamily* family = nullptr);

PatchLattice lgl_lattice(const Patch& patch);
PatchLattice dyadic_lattice(const Patch& patch, const NestedDyadicFamily& family);

// Largest trace mismatch over interior edges for stacked patch nodal values on `space`'s lattices.
double max_interface_jump(const Mesh& mesh, const DofMap& space, const Eigen::VectorXd& stacked);

}  // namespace sedg
