#include "sedg/mesh.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace sedg {

namespace {

std::array<double, 2> corner_coords(const Patch& p, int corner) {
  return {corner % 2 == 0 ? p.box[0].a : p.box[0].b, corner / 2 == 0 ? p.box[1].a : p.box[1].b};
}

double overlap(const Interval& a, const Interval& b) {
  return std::min(a.b, b.b) - std::max(a.a, b.a);
}

}  // namespace

Mesh::Mesh(std::vector<Patch> patches, std::vector<Vertex> vertices, std::vector<Edge> edges,
           std::vector<std::array<int, 4>> patch_edges, std::vector<std::array<int, 4>> patch_vertices)
    : patches_(std::move(patches)),
      vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      patch_edges_(std::move(patch_edges)),
      patch_vertices_(std::move(patch_vertices)) {}

int Mesh::num_interior_edges() const {
  return static_cast<int>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return !e.boundary(); }));
}

int Mesh::max_degree() const {
  int m = 0;
  for (const auto& p : patches_) m = std::max({m, p.degree[0], p.degree[1]});
  return m;
}

Mesh build_mesh(const std::vector<Box>& boxes, const std::vector<Degree>& degrees) {
  if (boxes.empty() || boxes.size() != degrees.size()) {
    throw std::invalid_argument("build_mesh: need one degree vector per patch");
  }
  const int n = static_cast<int>(boxes.size());
  std::vector<Patch> patches(n);
  for (int r = 0; r < n; ++r) {
    if (degrees[r][0] < 1 || degrees[r][1] < 1) throw std::invalid_argument("build_mesh: degrees must be >= 1");
    patches[r] = Patch{r, boxes[r], degrees[r]};
  }

  // Pairwise conformity: intersections must be empty, a shared corner, or a full shared side.
  for (int r = 0; r < n; ++r) {
    for (int s = r + 1; s < n; ++s) {
      const double ox = overlap(boxes[r][0], boxes[s][0]);
      const double oy = overlap(boxes[r][1], boxes[s][1]);
      if (ox < 0 || oy < 0) continue;
      if (ox > 0 && oy > 0) throw MeshConformityError("patches overlap", r, s);
      if (ox == 0 && oy == 0) continue;
      const int axis = ox > 0 ? 0 : 1;  // tangential axis of the common segment
      if (!(boxes[r][axis] == boxes[s][axis])) {
        throw MeshConformityError("patches share a partial side", r, s);
      }
    }
  }

  std::vector<Vertex> vertices;
  std::map<std::array<double, 2>, int> vertex_id;
  std::vector<std::array<int, 4>> patch_vertices(n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < 4; ++c) {
      const auto x = corner_coords(patches[r], c);
      auto [it, inserted] = vertex_id.try_emplace(x, static_cast<int>(vertices.size()));
      if (inserted) vertices.push_back(Vertex{x, {}, false});
      vertices[it->second].corners.push_back({r, c});
      patch_vertices[r][c] = it->second;
    }
  }

  // Patch corners lying strictly inside another patch's side are hanging nodes.
  for (int r = 0; r < n; ++r) {
    for (const auto& v : vertices) {
      for (int k = 0; k < 2; ++k) {
        const auto& I = boxes[r][k];
        const auto& J = boxes[r][1 - k];
        if ((v.x[1 - k] == J.a || v.x[1 - k] == J.b) && v.x[k] > I.a && v.x[k] < I.b) {
          throw MeshConformityError("hanging vertex on a patch side", r, v.corners.front().patch);
        }
      }
    }
  }

  std::vector<Edge> edges;
  std::map<std::tuple<int, double, double, double>, int> edge_id;
  std::vector<std::array<int, 4>> patch_edges(n);
  for (int r = 0; r < n; ++r) {
    for (int side = 0; side < 4; ++side) {
      const int nk = side_normal_axis(side);
      const int tk = side_tangential_axis(side);
      const double pos = side_is_upper(side) ? boxes[r][nk].b : boxes[r][nk].a;
      const Interval span = boxes[r][tk];
      auto [it, inserted] = edge_id.try_emplace({tk, pos, span.a, span.b}, static_cast<int>(edges.size()));
      if (inserted) {
        Edge e;
        e.axis = tk;
        e.position = pos;
        e.span = span;
        std::array<double, 2> lo{}, hi{};
        lo[nk] = hi[nk] = pos;
        lo[tk] = span.a;
        hi[tk] = span.b;
        e.vertices = {vertex_id.at(lo), vertex_id.at(hi)};
        edges.push_back(e);
      }
      Edge& e = edges[it->second];
      if (e.sides.size() == 2) throw MeshConformityError("edge shared by more than two patches", e.sides[0].patch, r);
      if (!e.sides.empty() && side_is_upper(e.sides[0].side) == side_is_upper(side)) {
        throw MeshConformityError("patches overlap across an edge", e.sides[0].patch, r);
      }
      e.sides.push_back({r, side});
      patch_edges[r][side] = it->second;
    }
  }
  for (auto& e : edges) {
    if (e.boundary()) {
      vertices[e.vertices[0]].boundary = true;
      vertices[e.vertices[1]].boundary = true;
    }
  }
  return {std::move(patches), std::move(vertices), std::move(edges), std::move(patch_edges),
          std::move(patch_vertices)};
}

Mesh make_tensor_mesh(const Box& domain, int nx, int ny, const std::vector<Degree>& degrees) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("make_tensor_mesh: need at least one patch");
  if (static_cast<int>(degrees.size()) != nx * ny) {
    throw std::invalid_argument("make_tensor_mesh: degree table size mismatch");
  }
  auto cut = [](const Interval& I, int n, int i) {
    return i == n ? I.b : I.a + I.length() * static_cast<double>(i) / n;
  };
  std::vector<Box> boxes;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      boxes.push_back({Interval(cut(domain[0], nx, i), cut(domain[0], nx, i + 1)),
                       Interval(cut(domain[1], ny, j), cut(domain[1], ny, j + 1))});
    }
  }
  return build_mesh(boxes, degrees);
}

GradingReport validate_grading(const Mesh& mesh, const GradingBounds& bounds) {
  GradingReport rep;
  std::ostringstream err;
  for (const auto& p : mesh.patches()) {
    const double aspect = std::max(p.size(0), p.size(1)) / std::min(p.size(0), p.size(1));
    const double deg = static_cast<double>(std::max(p.degree[0], p.degree[1])) / std::min(p.degree[0], p.degree[1]);
    rep.max_aspect = std::max(rep.max_aspect, aspect);
    rep.max_degree_within = std::max(rep.max_degree_within, deg);
    if (aspect > bounds.aspect) err << "patch " << p.id << " aspect ratio " << aspect << "; ";
    if (deg > bounds.degree_within) err << "patch " << p.id << " degree ratio " << deg << "; ";
  }
  for (std::size_t f = 0; f < mesh.edges().size(); ++f) {
    const auto& e = mesh.edges()[f];
    if (e.boundary()) continue;
    const auto& a = mesh.patch(e.sides[0].patch).degree;
    const auto& b = mesh.patch(e.sides[1].patch).degree;
    double r = 1.0;
    for (int k = 0; k < 2; ++k) r = std::max({r, static_cast<double>(a[k]) / b[k], static_cast<double>(b[k]) / a[k]});
    rep.max_degree_across = std::max(rep.max_degree_across, r);
    if (r > bounds.degree_across) {
      err << "face " << f << " between patches " << e.sides[0].patch << " and " << e.sides[1].patch
          << " degree ratio " << r << "; ";
    }
  }
  if (!err.str().empty()) throw GradingError("grading violated: " + err.str());
  return rep;
}

double face_weight(const Mesh& mesh, int edge) {
  const auto& e = mesh.edges().at(edge);
  double w = 0.0;
  for (const auto& s : e.sides) {
    const Patch& p = mesh.patch(s.patch);
    const int k = side_normal_axis(s.side);
    const double q = p.degree[k] + 1.0;
    w = std::max(w, q * q / p.size(k));
  }
  return w;
}

SharpSelection select_sharp_elements(const Mesh& mesh) {
  SharpSelection sel;
  for (const auto& e : mesh.edges()) {
    SharpChoice best{-1, 0};
    for (const auto& s : e.sides) {
      const int q = mesh.patch(s.patch).degree[e.axis];
      if (best.patch < 0 || q < best.degree || (q == best.degree && s.patch < best.patch)) best = {s.patch, q};
    }
    sel.edge.push_back(best);
  }
  for (const auto& v : mesh.vertices()) {
    SharpChoice best{-1, 0};
    for (const auto& c : v.corners) {
      const auto& d = mesh.patch(c.patch).degree;
      const int q = d[0] + d[1];
      if (best.patch < 0 || q < best.degree || (q == best.degree && c.patch < best.patch)) best = {c.patch, q};
    }
    sel.vertex.push_back(best);
  }
  return sel;
}

}  // namespace sedg
