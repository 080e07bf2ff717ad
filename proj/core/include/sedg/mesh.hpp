#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "sedg/lgl.hpp"

namespace sedg {

class MeshConformityError : public std::runtime_error {
 public:
  MeshConformityError(const std::string& what, int patch_a, int patch_b)
      : std::runtime_error(what), patch_a(patch_a), patch_b(patch_b) {}
  int patch_a;
  int patch_b;
};

class GradingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Box = std::array<Interval, 2>;
using Degree = std::array<int, 2>;

// Local sides: 0 x=a0, 1 x=b0, 2 y=a1, 3 y=b1.
// Local corners: 0 (a0,a1), 1 (b0,a1), 2 (a0,b1), 3 (b0,b1).
inline int side_normal_axis(int side) { return side / 2; }
inline int side_tangential_axis(int side) { return 1 - side / 2; }
inline bool side_is_upper(int side) { return side % 2 == 1; }

struct Patch {
  int id = 0;
  Box box;
  Degree degree{1, 1};
  double size(int k) const { return box[k].length(); }
};

struct EdgeSide {
  int patch;
  int side;
};

struct Edge {
  int axis = 0;         // tangential axis
  double position = 0;  // coordinate along the normal axis
  Interval span;
  std::array<int, 2> vertices{-1, -1};  // low end, high end
  std::vector<EdgeSide> sides;          // 1 on the boundary, 2 inside
  bool boundary() const { return sides.size() == 1; }
};

struct VertexCorner {
  int patch;
  int corner;
};

struct Vertex {
  std::array<double, 2> x{};
  std::vector<VertexCorner> corners;  // ordered by patch id
  bool boundary = false;
};

class Mesh {
 public:
  Mesh(std::vector<Patch> patches, std::vector<Vertex> vertices, std::vector<Edge> edges,
       std::vector<std::array<int, 4>> patch_edges, std::vector<std::array<int, 4>> patch_vertices);

  const std::vector<Patch>& patches() const { return patches_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Patch& patch(int r) const { return patches_[r]; }
  int patch_edge(int r, int side) const { return patch_edges_[r][side]; }
  int patch_vertex(int r, int corner) const { return patch_vertices_[r][corner]; }
  int num_interior_edges() const;
  int max_degree() const;

 private:
  std::vector<Patch> patches_;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 4>> patch_edges_;
  std::vector<std::array<int, 4>> patch_vertices_;
};

// Corner coordinates must match bitwise between neighbours.
Mesh build_mesh(const std::vector<Box>& boxes, const std::vector<Degree>& degrees);

// nx by ny patches on `domain`; patch (i, j) has id i + nx j.
Mesh make_tensor_mesh(const Box& domain, int nx, int ny, const std::vector<Degree>& degrees);

struct GradingBounds {
  double aspect = 2.0;
  double degree_within = 2.0;
  double degree_across = 2.0;
};

struct GradingReport {
  double max_aspect = 1.0;
  double max_degree_within = 1.0;
  double max_degree_across = 1.0;
};

GradingReport validate_grading(const Mesh& mesh, const GradingBounds& bounds = {});

double face_weight(const Mesh& mesh, int edge);

struct SharpChoice {
  int patch;
  int degree;  // tangential degree for edges, degree sum for vertices
};

struct SharpSelection {
  std::vector<SharpChoice> vertex;
  std::vector<SharpChoice> edge;
};

SharpSelection select_sharp_elements(const Mesh& mesh);

}  // namespace sedg
