#include "sedg/assembly.hpp"

#include <fstream>
#include <stdexcept>

namespace sedg {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct PatchRules {
  std::array<LglRule, 2> rule;
  std::array<Eigen::MatrixXd, 2> diff;
};

PatchRules patch_rules(const Patch& p) {
  PatchRules pr;
  for (int k = 0; k < 2; ++k) {
    pr.rule[k] = build_lgl_rule(p.degree[k], p.box[k]);
    pr.diff[k] = differentiation_matrix(pr.rule[k].nodes);
  }
  return pr;
}

Eigen::MatrixXd stiffness_1d(const PatchRules& pr, int k) {
  const Eigen::Map<const Eigen::VectorXd> w(pr.rule[k].weights.data(), pr.rule[k].size());
  return pr.diff[k].transpose() * w.asDiagonal() * pr.diff[k];
}

Eigen::MatrixXd exact_mass_1d(const LglRule& rule) {
  const GaussRule g = build_gauss_rule(rule.degree + 1, rule.interval);
  const Eigen::MatrixXd l = lagrange_matrix(rule.nodes, g.nodes);
  const Eigen::Map<const Eigen::VectorXd> w(g.weights.data(), static_cast<Eigen::Index>(g.weights.size()));
  return l.transpose() * w.asDiagonal() * l;
}

// Local index of the node with tangential index t and normal index l on a side with normal axis k.
int line_node(const PatchLattice& lat, int k, int t, int l) { return k == 0 ? lat.index(l, t) : lat.index(t, l); }

SparseMatrix symmetrized(Triplets& trips, int n) {
  SparseMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  SparseMatrix at = a.transpose();
  SparseMatrix s = 0.5 * (a + at);
  s.makeCompressed();
  return s;
}

void add_elements(const Mesh& mesh, const DofMap& dg, FormMode mode, Triplets& trips) {
  for (int r = 0; r < dg.num_patches(); ++r) {
    const PatchRules pr = patch_rules(mesh.patch(r));
    const auto& lat = dg.lattice(r);
    const int n0 = lat.n(0), n1 = lat.n(1), off = dg.node_offset(r);
    const Eigen::MatrixXd k0 = stiffness_1d(pr, 0), k1 = stiffness_1d(pr, 1);
    if (mode == FormMode::kNi) {
      const auto& w0 = pr.rule[0].weights;
      const auto& w1 = pr.rule[1].weights;
      for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < n0; ++i) {
          for (int ii = 0; ii < n0; ++ii) trips.emplace_back(off + lat.index(i, j), off + lat.index(ii, j), k0(i, ii) * w1[j]);
          for (int jj = 0; jj < n1; ++jj) trips.emplace_back(off + lat.index(i, j), off + lat.index(i, jj), w0[i] * k1(j, jj));
        }
      }
    } else {
      const Eigen::MatrixXd m0 = exact_mass_1d(pr.rule[0]), m1 = exact_mass_1d(pr.rule[1]);
      for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n0; ++i)
          for (int jj = 0; jj < n1; ++jj)
            for (int ii = 0; ii < n0; ++ii)
              trips.emplace_back(off + lat.index(i, j), off + lat.index(ii, jj),
                                 k0(i, ii) * m1(j, jj) + m0(i, ii) * k1(j, jj));
    }
  }
}

void add_faces(const Mesh& mesh, const DofMap& dg, double gamma, FormMode mode, bool consistency, Triplets& trips) {
  std::vector<PatchRules> rules;
  for (const auto& p : mesh.patches()) rules.push_back(patch_rules(p));

  for (std::size_t f = 0; f < mesh.edges().size(); ++f) {
    const Edge& e = mesh.edges()[f];
    const int tk = e.axis;
    const int nk_axis = 1 - tk;
    int pstar = 0;
    for (const auto& s : e.sides) pstar = std::max(pstar, mesh.patch(s.patch).degree[tk]);
    std::vector<double> qx, qw;
    if (mode == FormMode::kNi) {
      const LglRule q = build_lgl_rule(pstar, e.span);
      qx = q.nodes;
      qw = q.weights;
    } else {
      const GaussRule q = build_gauss_rule(pstar + 1, e.span);
      qx = q.nodes;
      qw = q.weights;
    }
    const int nq = static_cast<int>(qx.size());
    const double omega = face_weight(mesh, static_cast<int>(f));
    const double avg = 1.0 / static_cast<double>(e.sides.size());

    std::vector<int> jcols, gcols;
    for (const auto& s : e.sides) {
      const auto& lat = dg.lattice(s.patch);
      const int nt = lat.n(tk), nn = lat.n(nk_axis);
      const int lend = side_is_upper(s.side) ? nn - 1 : 0;
      for (int t = 0; t < nt; ++t) jcols.push_back(dg.node_offset(s.patch) + line_node(lat, nk_axis, t, lend));
      if (consistency) {
        for (int t = 0; t < nt; ++t)
          for (int l = 0; l < nn; ++l) gcols.push_back(dg.node_offset(s.patch) + line_node(lat, nk_axis, t, l));
      }
    }
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(nq, static_cast<Eigen::Index>(jcols.size()));
    Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(nq, static_cast<Eigen::Index>(gcols.size()));
    int jc = 0, gc = 0;
    for (const auto& s : e.sides) {
      const auto& lat = dg.lattice(s.patch);
      const int nt = lat.n(tk), nn = lat.n(nk_axis);
      const int lend = side_is_upper(s.side) ? nn - 1 : 0;
      const double sign = side_is_upper(s.side) ? 1.0 : -1.0;
      const Eigen::MatrixXd tr = lagrange_matrix(lat.coords[tk], qx);
      jm.middleCols(jc, nt) = sign * tr;
      jc += nt;
      if (consistency) {
        const Eigen::MatrixXd& d = rules[s.patch].diff[nk_axis];
        for (int t = 0; t < nt; ++t)
          for (int l = 0; l < nn; ++l) gm.col(gc + t * nn + l) = avg * d(lend, l) * tr.col(t);
        gc += nt * nn;
      }
    }
    const Eigen::Map<const Eigen::VectorXd> w(qw.data(), nq);
    const Eigen::MatrixXd pen = gamma * omega * (jm.transpose() * w.asDiagonal() * jm);
    for (int a = 0; a < pen.rows(); ++a)
      for (int b = 0; b < pen.cols(); ++b) trips.emplace_back(jcols[a], jcols[b], pen(a, b));
    if (consistency) {
      const Eigen::MatrixXd x = gm.transpose() * w.asDiagonal() * jm;
      for (int a = 0; a < x.rows(); ++a) {
        for (int b = 0; b < x.cols(); ++b) {
          if (x(a, b) == 0.0) continue;
          trips.emplace_back(gcols[a], jcols[b], -x(a, b));
          trips.emplace_back(jcols[b], gcols[a], -x(a, b));
        }
      }
    }
  }
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("penalty gamma must be positive");
}

}  // namespace

SparseMatrix assemble_dg_ni(const Mesh& mesh, const DofMap& dg, double gamma) {
  check_gamma(gamma);
  Triplets trips;
  add_elements(mesh, dg, FormMode::kNi, trips);
  add_faces(mesh, dg, gamma, FormMode::kNi, true, trips);
  return symmetrized(trips, dg.num_dofs());
}

SparseMatrix assemble_reduced(const Mesh& mesh, const DofMap& dg, double gamma, FormMode mode) {
  check_gamma(gamma);
  Triplets trips;
  add_elements(mesh, dg, mode, trips);
  add_faces(mesh, dg, gamma, mode, false, trips);
  return symmetrized(trips, dg.num_dofs());
}

SparseMatrix assemble_element_stiffness(const Mesh& mesh, const DofMap& dg) {
  Triplets trips;
  add_elements(mesh, dg, FormMode::kNi, trips);
  return symmetrized(trips, dg.num_dofs());
}

Eigen::VectorXd stage_one_node_weights(const Mesh& mesh, const DofMap& dg) {
  Eigen::VectorXd w(dg.num_dofs());
  for (int r = 0; r < dg.num_patches(); ++r) {
    const Patch& p = mesh.patch(r);
    const LglRule rx = build_lgl_rule(p.degree[0], p.box[0]);
    const LglRule ry = build_lgl_rule(p.degree[1], p.box[1]);
    const auto& lat = dg.lattice(r);
    for (int j = 0; j < lat.n(1); ++j) {
      for (int i = 0; i < lat.n(0); ++i) {
        const double a = rx.weights[i], b = ry.weights[j];
        w(dg.node_offset(r) + lat.index(i, j)) = b / a + a / b;
      }
    }
  }
  return w;
}

Eigen::VectorXd assemble_b1_diagonal(const Mesh& mesh, const DofMap& dg, const StageOneWeights& weights) {
  Eigen::VectorXd diag = weights.beta1 * weights.c1sq * stage_one_node_weights(mesh, dg);
  const double face_scale = weights.beta1 * weights.gamma * weights.rho1;
  for (std::size_t f = 0; f < mesh.edges().size(); ++f) {
    const Edge& e = mesh.edges()[f];
    const double omega = face_weight(mesh, static_cast<int>(f));
    for (const auto& s : e.sides) {
      const Patch& p = mesh.patch(s.patch);
      const auto& lat = dg.lattice(s.patch);
      const LglRule rt = build_lgl_rule(p.degree[e.axis], p.box[e.axis]);
      const int nk = 1 - e.axis;
      const int lend = side_is_upper(s.side) ? lat.n(nk) - 1 : 0;
      for (int t = 0; t < lat.n(e.axis); ++t) {
        diag(dg.node_offset(s.patch) + line_node(lat, nk, t, lend)) += face_scale * omega * rt.weights[t];
      }
    }
  }
  return diag;
}

SparseMatrix assemble_b1(const Mesh& mesh, const DofMap& dg, const StageOneWeights& weights) {
  const Eigen::VectorXd d = assemble_b1_diagonal(mesh, dg, weights);
  SparseMatrix b(d.size(), d.size());
  b.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index i = 0; i < d.size(); ++i) b.insert(i, i) = d(i);
  b.makeCompressed();
  return b;
}

SparseMatrix patch_conforming_stiffness(const PatchLattice& lat, SpaceKind kind) {
  Triplets trips;
  const int n0 = lat.n(0), n1 = lat.n(1);
  if (kind == SpaceKind::kDfeCg) {
    // Linear FE stiffness and mass along each direction, then K0 x M1 + M0 x K1.
    std::array<Eigen::MatrixXd, 2> k, m;
    for (int d = 0; d < 2; ++d) {
      const int n = lat.n(d);
      k[d] = Eigen::MatrixXd::Zero(n, n);
      m[d] = Eigen::MatrixXd::Zero(n, n);
      for (int c = 0; c + 1 < n; ++c) {
        const double h = lat.coords[d][c + 1] - lat.coords[d][c];
        k[d](c, c) += 1.0 / h;
        k[d](c + 1, c + 1) += 1.0 / h;
        k[d](c, c + 1) -= 1.0 / h;
        k[d](c + 1, c) -= 1.0 / h;
        m[d](c, c) += h / 3.0;
        m[d](c + 1, c + 1) += h / 3.0;
        m[d](c, c + 1) += h / 6.0;
        m[d](c + 1, c) += h / 6.0;
      }
    }
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n0; ++i)
        for (int jj = std::max(0, j - 1); jj <= std::min(n1 - 1, j + 1); ++jj)
          for (int ii = std::max(0, i - 1); ii <= std::min(n0 - 1, i + 1); ++ii)
            trips.emplace_back(lat.index(i, j), lat.index(ii, jj), k[0](i, ii) * m[1](j, jj) + m[0](i, ii) * k[1](j, jj));
  } else {
    std::array<LglRule, 2> rule;
    std::array<Eigen::MatrixXd, 2> k;
    for (int d = 0; d < 2; ++d) {
      rule[d] = build_lgl_rule(lat.n(d) - 1, Interval(lat.coords[d].front(), lat.coords[d].back()));
      const Eigen::MatrixXd dm = differentiation_matrix(lat.coords[d]);
      const Eigen::Map<const Eigen::VectorXd> w(rule[d].weights.data(), lat.n(d));
      k[d] = dm.transpose() * w.asDiagonal() * dm;
    }
    for (int j = 0; j < n1; ++j) {
      for (int i = 0; i < n0; ++i) {
        for (int ii = 0; ii < n0; ++ii) trips.emplace_back(lat.index(i, j), lat.index(ii, j), k[0](i, ii) * rule[1].weights[j]);
        for (int jj = 0; jj < n1; ++jj) trips.emplace_back(lat.index(i, j), lat.index(i, jj), rule[0].weights[i] * k[1](j, jj));
      }
    }
  }
  return symmetrized(trips, lat.size());
}

SparseMatrix galerkin_sum(const DofMap& space, const std::vector<SparseMatrix>& local) {
  SparseMatrix sum(space.num_dofs(), space.num_dofs());
  for (int r = 0; r < space.num_patches(); ++r) {
    const SparseMatrix p = space.prolongation(r);
    sum += SparseMatrix(p.transpose() * local[r] * p);
  }
  SparseMatrix st = sum.transpose();
  SparseMatrix s = 0.5 * (sum + st);
  s.prune(0.0);
  s.makeCompressed();
  return s;
}

SparseMatrix assemble_conforming(const Mesh& mesh, const DofMap& space) {
  if (space.kind() == SpaceKind::kSeDg) throw std::invalid_argument("assemble_conforming: needs a conforming space");
  (void)mesh;
  std::vector<SparseMatrix> local;
  for (int r = 0; r < space.num_patches(); ++r) local.push_back(patch_conforming_stiffness(space.lattice(r), space.kind()));
  return galerkin_sum(space, local);
}

AnisotropyClassification classify_anisotropy(const DofMap& secg, double c_aspect) {
  AnisotropyClassification c;
  c.c_aspect = c_aspect;
  for (int r = 0; r < secg.num_patches(); ++r) {
    const auto& lat = secg.lattice(r);
    const int c0 = lat.n(0) - 1, c1 = lat.n(1) - 1;
    std::array<std::vector<char>, 2> flags{std::vector<char>(c0 * c1), std::vector<char>(c0 * c1)};
    for (int j = 0; j < c1; ++j) {
      for (int i = 0; i < c0; ++i) {
        const double h0 = lat.coords[0][i + 1] - lat.coords[0][i];
        const double h1 = lat.coords[1][j + 1] - lat.coords[1][j];
        flags[0][i + c0 * j] = h1 / h0 > c_aspect;
        flags[1][i + c0 * j] = h0 / h1 > c_aspect;
      }
    }
    c.anisotropic.push_back(std::move(flags));
  }
  return c;
}

SparseMatrix patch_b2(const PatchLattice& lat, const std::array<std::vector<char>, 2>& anisotropic, double c_tune) {
  Triplets trips;
  const int c0 = lat.n(0) - 1, c1 = lat.n(1) - 1;
  for (int j = 0; j < c1; ++j) {
    for (int i = 0; i < c0; ++i) {
      const std::array<double, 2> h{lat.coords[0][i + 1] - lat.coords[0][i], lat.coords[1][j + 1] - lat.coords[1][j]};
      for (int k = 0; k < 2; ++k) {
        const double ratio = 0.5 * h[1 - k] / h[k];  // trapezoid weight omega' / 2 over h_k
        if (anisotropic[k][i + c0 * j]) {
          for (int o = 0; o < 2; ++o) {
            const int a = k == 0 ? lat.index(i, j + o) : lat.index(i + o, j);
            const int b = k == 0 ? lat.index(i + 1, j + o) : lat.index(i + o, j + 1);
            trips.emplace_back(a, a, ratio);
            trips.emplace_back(b, b, ratio);
            trips.emplace_back(a, b, -ratio);
            trips.emplace_back(b, a, -ratio);
          }
        } else {
          for (int o = 0; o < 4; ++o) trips.emplace_back(lat.index(i + o % 2, j + o / 2), lat.index(i + o % 2, j + o / 2), c_tune * ratio);
        }
      }
    }
  }
  return symmetrized(trips, lat.size());
}

SparseMatrix assemble_b2(const DofMap& secg, const AnisotropyClassification& classification, double c_tune) {
  std::vector<SparseMatrix> local;
  for (int r = 0; r < secg.num_patches(); ++r) local.push_back(patch_b2(secg.lattice(r), classification.anisotropic[r], c_tune));
  return galerkin_sum(secg, local);
}

Eigen::VectorXd assemble_rhs_ni(const Mesh& mesh, const DofMap& dg, const std::function<double(double, double)>& f) {
  Eigen::VectorXd b(dg.num_dofs());
  for (int r = 0; r < dg.num_patches(); ++r) {
    const Patch& p = mesh.patch(r);
    const LglRule rx = build_lgl_rule(p.degree[0], p.box[0]);
    const LglRule ry = build_lgl_rule(p.degree[1], p.box[1]);
    const auto& lat = dg.lattice(r);
    for (int j = 0; j < lat.n(1); ++j)
      for (int i = 0; i < lat.n(0); ++i)
        b(dg.node_offset(r) + lat.index(i, j)) = f(rx.nodes[i], ry.nodes[j]) * rx.weights[i] * ry.weights[j];
  }
  return b;
}

void write_matrix_market(const std::string& path, const SparseMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
  out.precision(17);
  for (int c = 0; c < matrix.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(matrix, c); it; ++it) out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

}  // namespace sedg
