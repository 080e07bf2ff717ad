#include "sedg/space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sedg {

namespace {

// Local lattice index of the t-th node along `side`.
int side_node(const PatchLattice& lat, int side, int t) {
  switch (side) {
    case 0: return lat.index(0, t);
    case 1: return lat.index(lat.n(0) - 1, t);
    case 2: return lat.index(t, 0);
    default: return lat.index(t, lat.n(1) - 1);
  }
}

int corner_node(const PatchLattice& lat, int corner) {
  return lat.index(corner % 2 == 0 ? 0 : lat.n(0) - 1, corner / 2 == 0 ? 0 : lat.n(1) - 1);
}

}  // namespace

PatchLattice lgl_lattice(const Patch& patch) {
  PatchLattice lat;
  for (int k = 0; k < 2; ++k) lat.coords[k] = build_lgl_rule(patch.degree[k], patch.box[k]).nodes;
  return lat;
}

PatchLattice dyadic_lattice(const Patch& patch, const NestedDyadicFamily& family) {
  PatchLattice lat;
  for (int k = 0; k < 2; ++k) {
    lat.coords[k] = family.at(patch.degree[k]).mapped_to(patch.box[k]).breakpoint_values();
  }
  return lat;
}

SparseMatrix DofMap::global_prolongation() const {
  std::vector<Eigen::Triplet<double>> trips;
  for (int r = 0; r < num_patches(); ++r) {
    const auto& p = prolong_[r];
    for (int i = 0; i < p.outerSize(); ++i) {
      for (RowSparseMatrix::InnerIterator it(p, i); it; ++it) {
        trips.emplace_back(offset_[r] + i, static_cast<int>(it.col()), it.value());
      }
    }
  }
  SparseMatrix s(num_nodes(), num_dofs());
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

Eigen::VectorXd DofMap::restrict_home(const Eigen::VectorXd& stacked) const {
  Eigen::VectorXd x(num_dofs());
  for (int d = 0; d < num_dofs(); ++d) x(d) = stacked(offset_[info_[d].home_patch] + info_[d].home_node);
  return x;
}

DofMap build_dofmap(const Mesh& mesh, SpaceKind kind, const NestedDyadicFamily* family) {
  if (kind == SpaceKind::kDfeCg && (family == nullptr || family->p_max() < mesh.max_degree())) {
    throw std::invalid_argument("build_dofmap: DFE-CG needs a dyadic family covering all degrees");
  }
  const int np = static_cast<int>(mesh.patches().size());
  DofMap map;
  map.kind_ = kind;
  map.offset_.assign(np + 1, 0);
  for (int r = 0; r < np; ++r) {
    const Patch& p = mesh.patch(r);
    map.lattice_.push_back(kind == SpaceKind::kDfeCg ? dyadic_lattice(p, *family) : lgl_lattice(p));
    map.offset_[r + 1] = map.offset_[r] + map.lattice_[r].size();
  }

  std::vector<std::vector<Eigen::Triplet<double>>> rows(np);

  if (kind == SpaceKind::kSeDg) {
    for (int r = 0; r < np; ++r) {
      for (int i = 0; i < map.lattice_[r].size(); ++i) {
        rows[r].emplace_back(i, map.num_dofs(), 1.0);
        map.info_.push_back({DofRole::kInterior, r, r, i});
      }
    }
  } else {
    const SharpSelection sharp = select_sharp_elements(mesh);
    for (int r = 0; r < np; ++r) {
      const auto& lat = map.lattice_[r];
      for (int j = 1; j + 1 < lat.n(1); ++j) {
        for (int i = 1; i + 1 < lat.n(0); ++i) {
          rows[r].emplace_back(lat.index(i, j), map.num_dofs(), 1.0);
          map.info_.push_back({DofRole::kInterior, r, r, lat.index(i, j)});
        }
      }
    }
    const auto& edges = mesh.edges();
    std::vector<int> edge_first(edges.size(), -1);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].boundary()) continue;
      const int m = sharp.edge[e].patch;
      const int mside = edges[e].sides[0].patch == m ? edges[e].sides[0].side : edges[e].sides[1].side;
      const auto& lat = map.lattice_[m];
      edge_first[e] = map.num_dofs();
      const int nt = lat.n(side_tangential_axis(mside));
      for (int t = 1; t + 1 < nt; ++t) {
        map.info_.push_back({DofRole::kEdge, static_cast<int>(e), m, side_node(lat, mside, t)});
      }
    }
    std::vector<int> vertex_dof(mesh.vertices().size(), -1);
    for (std::size_t v = 0; v < mesh.vertices().size(); ++v) {
      const auto& vx = mesh.vertices()[v];
      if (vx.boundary) continue;
      vertex_dof[v] = map.num_dofs();
      const int home = sharp.vertex[v].patch;
      int corner = -1;
      for (const auto& c : vx.corners) {
        if (c.patch == home) corner = c.corner;
      }
      map.info_.push_back({DofRole::kVertex, static_cast<int>(v), home, corner_node(map.lattice_[home], corner)});
    }

    for (int r = 0; r < np; ++r) {
      const auto& lat = map.lattice_[r];
      for (int c = 0; c < 4; ++c) {
        const int d = vertex_dof[mesh.patch_vertex(r, c)];
        if (d >= 0) rows[r].emplace_back(corner_node(lat, c), d, 1.0);
      }
      for (int side = 0; side < 4; ++side) {
        const int e = mesh.patch_edge(r, side);
        const Edge& edge = edges[e];
        if (edge.boundary()) continue;
        const int tk = side_tangential_axis(side);
        const int m = sharp.edge[e].patch;
        const auto& mcoords = map.lattice_[m].coords[tk];
        const int nm = static_cast<int>(mcoords.size());
        // Master values along the edge: vertex DOF, edge DOFs, vertex DOF (-1 means zero).
        std::vector<int> master(nm);
        master[0] = vertex_dof[edge.vertices[0]];
        master[nm - 1] = vertex_dof[edge.vertices[1]];
        for (int t = 1; t + 1 < nm; ++t) master[t] = edge_first[e] + t - 1;
        const int nt = lat.n(tk);
        if (r == m) {
          for (int t = 1; t + 1 < nt; ++t) rows[r].emplace_back(side_node(lat, side, t), master[t], 1.0);
          continue;
        }
        const std::vector<double> inner(lat.coords[tk].begin() + 1, lat.coords[tk].end() - 1);
        const Eigen::MatrixXd tr = interp_grid_to_grid(mcoords, inner, map.trace_mode());
        for (int t = 1; t + 1 < nt; ++t) {
          for (int k = 0; k < nm; ++k) {
            if (master[k] < 0 || tr(t - 1, k) == 0.0) continue;
            rows[r].emplace_back(side_node(lat, side, t), master[k], tr(t - 1, k));
          }
        }
      }
    }
  }

  for (int r = 0; r < np; ++r) {
    RowSparseMatrix p(map.lattice_[r].size(), map.num_dofs());
    p.setFromTriplets(rows[r].begin(), rows[r].end());
    map.prolong_.push_back(std::move(p));
  }
  return map;
}

double max_interface_jump(const Mesh& mesh, const DofMap& space, const Eigen::VectorXd& stacked) {
  double worst = 0.0;
  for (const auto& e : mesh.edges()) {
    if (e.boundary()) continue;
    std::array<std::vector<double>, 2> coords;
    std::array<Eigen::VectorXd, 2> trace;
    for (int s = 0; s < 2; ++s) {
      const int r = e.sides[s].patch;
      const int side = e.sides[s].side;
      const auto& lat = space.lattice(r);
      coords[s] = lat.coords[e.axis];
      trace[s].resize(lat.n(e.axis));
      for (int t = 0; t < lat.n(e.axis); ++t) trace[s](t) = stacked(space.node_offset(r) + side_node(lat, side, t));
    }
    std::vector<double> samples = coords[0];
    samples.insert(samples.end(), coords[1].begin(), coords[1].end());
    std::sort(samples.begin(), samples.end());
    const Eigen::VectorXd a = interp_grid_to_grid(coords[0], samples, space.trace_mode()) * trace[0];
    const Eigen::VectorXd b = interp_grid_to_grid(coords[1], samples, space.trace_mode()) * trace[1];
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace sedg
