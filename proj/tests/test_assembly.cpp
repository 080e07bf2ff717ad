#include <cmath>
#include <random>

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include "sedg/assembly.hpp"
#include "sedg/grid.hpp"
#include "support/oracle.hpp"

using namespace sedg;

namespace {

struct Case {
  std::vector<std::array<double, 4>> boxes;
  std::vector<Degree> degrees;
};

Mesh library_mesh(const Case& c) {
  std::vector<Box> boxes;
  for (const auto& b : c.boxes) boxes.push_back({Interval(b[0], b[1]), Interval(b[2], b[3])});
  return build_mesh(boxes, c.degrees);
}

oracle::OMesh oracle_mesh(const Case& c) {
  std::vector<std::array<int, 2>> d(c.degrees.begin(), c.degrees.end());
  return oracle::make_mesh(c.boxes, d);
}

std::vector<Case> small_cases() {
  return {
      {{{0, 1, 0, 1}}, {{3, 3}}},
      {{{0, 2, 0, 1}}, {{2, 4}}},
      {{{0, 1, 0, 1}, {1, 2, 0, 1}}, {{2, 2}, {4, 4}}},
      {{{0, 1, 0, 1}, {1, 2, 0, 1}}, {{3, 2}, {1, 4}}},
      {{{0, 1, 0, 1}, {0, 1, 1, 1.5}}, {{2, 3}, {4, 2}}},
      {{{0, 1, 0, 1}, {1, 2, 0, 1}, {0, 1, 1, 2}, {1, 2, 1, 2}}, {{2, 2}, {4, 3}, {3, 4}, {1, 2}}},
  };
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

}  // namespace

TEST(DgNi, MatchesPointwiseOracle) {
  for (const auto& c : small_cases()) {
    const Mesh mesh = library_mesh(c);
    const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
    const auto om = oracle_mesh(c);
    for (double gamma : {1.0, 3.0}) {
      const Eigen::MatrixXd ref = oracle::sipg(om, gamma, oracle::Quad::kNi, true);
      EXPECT_LT(rel_diff(dense(assemble_dg_ni(mesh, dg, gamma)), ref), 1e-11);
    }
  }
}

TEST(DgNi, RejectsNonPositivePenalty) {
  const Mesh mesh = library_mesh(small_cases()[0]);
  const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
  EXPECT_THROW(assemble_dg_ni(mesh, dg, 0.0), std::invalid_argument);
  EXPECT_THROW(assemble_dg_ni(mesh, dg, -1.0), std::invalid_argument);
}

TEST(Reduced, MatchesOracleInBothModes) {
  for (const auto& c : small_cases()) {
    const Mesh mesh = library_mesh(c);
    const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
    const auto om = oracle_mesh(c);
    EXPECT_LT(rel_diff(dense(assemble_reduced(mesh, dg, 3.0, FormMode::kExact)),
                       oracle::sipg(om, 3.0, oracle::Quad::kExact, false)),
              1e-11);
    EXPECT_LT(rel_diff(dense(assemble_reduced(mesh, dg, 3.0, FormMode::kNi)),
                       oracle::sipg(om, 3.0, oracle::Quad::kNi, false)),
              1e-11);
  }
}

TEST(Reduced, ElementPartIsTheNiStiffness) {
  // The penalty part is linear in gamma, so the element part is 2 S(1) - S(2).
  for (const auto& c : small_cases()) {
    const Mesh mesh = library_mesh(c);
    const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
    const auto om = oracle_mesh(c);
    const Eigen::MatrixXd ref = 2.0 * oracle::sipg(om, 1.0, oracle::Quad::kNi, false) -
                                oracle::sipg(om, 2.0, oracle::Quad::kNi, false);
    EXPECT_LT(rel_diff(dense(assemble_element_stiffness(mesh, dg)), ref), 1e-10);
  }
}

TEST(DgNi, ContinuousFunctionSeesOnlyTheGradient) {
  // u = x(2-x) y(1-y) on [0,2]x[0,1] is continuous, vanishes on the boundary and |u|_1^2 = 4/9.
  const Case c{{{0, 1, 0, 1}, {1, 2, 0, 1}}, {{3, 3}, {3, 3}}};
  const Mesh mesh = library_mesh(c);
  const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
  Eigen::VectorXd u(dg.num_dofs());
  for (int r = 0; r < 2; ++r) {
    const auto& lat = dg.lattice(r);
    for (int j = 0; j < lat.n(1); ++j)
      for (int i = 0; i < lat.n(0); ++i) {
        const double x = lat.coords[0][i], y = lat.coords[1][j];
        u(dg.node_offset(r) + lat.index(i, j)) = x * (2 - x) * y * (1 - y);
      }
  }
  for (double gamma : {1.0, 10.0}) {
    EXPECT_NEAR(u.dot(assemble_dg_ni(mesh, dg, gamma) * u), 4.0 / 9.0, 1e-13);
    EXPECT_NEAR(u.dot(assemble_reduced(mesh, dg, gamma, FormMode::kExact) * u), 4.0 / 9.0, 1e-13);
  }
}

TEST(DgNi, SymmetricPositiveDefinite) {
  for (const auto& c : small_cases()) {
    const Mesh mesh = library_mesh(c);
    const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
    const Eigen::MatrixXd a = dense(assemble_dg_ni(mesh, dg, 3.0));
    EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    EXPECT_EQ(llt.info(), Eigen::Success);
  }
}

TEST(StageOne, NodeWeightsFromLglWeights) {
  const Case c{{{0, 2, 0, 1}}, {{3, 4}}};
  const Mesh mesh = library_mesh(c);
  const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
  const Eigen::VectorXd w = stage_one_node_weights(mesh, dg);
  const auto rx = oracle::lobatto(3, 0, 2), ry = oracle::lobatto(4, 0, 1);
  for (int j = 0; j <= 4; ++j)
    for (int i = 0; i <= 3; ++i) {
      const double a = rx.w[i], b = ry.w[j];
      EXPECT_NEAR(w(i + 4 * j), (1 / (a * a) + 1 / (b * b)) * a * b, 1e-12 * w(i + 4 * j));
    }
}

TEST(StageOne, B1IsDiagonalWithFaceTerms) {
  const Case c{{{0, 1, 0, 1}, {1, 2, 0, 1}}, {{2, 2}, {4, 4}}};
  const Mesh mesh = library_mesh(c);
  const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
  const auto om = oracle_mesh(c);

  StageOneWeights plain{1.0, 0.0, 1.0, 3.0};
  EXPECT_TRUE(assemble_b1_diagonal(mesh, dg, plain).isApprox(stage_one_node_weights(mesh, dg), 1e-15));

  const StageOneWeights wts{0.15, 1.25, 10.0, 3.0};
  const SparseMatrix b1 = assemble_b1(mesh, dg, wts);
  EXPECT_EQ(b1.nonZeros(), dg.num_dofs());
  Eigen::VectorXd expect = 0.15 * 10.0 * stage_one_node_weights(mesh, dg);
  for (int r = 0; r < 2; ++r) {
    const auto& p = om.patches[r];
    const auto rx = oracle::lobatto(p.degree[0], p.box[0], p.box[1]);
    const auto ry = oracle::lobatto(p.degree[1], p.box[2], p.box[3]);
    const int n0 = p.degree[0] + 1, n1 = p.degree[1] + 1;
    for (int side = 0; side < 4; ++side) {
      const double scale = 0.15 * 3.0 * 1.25 * oracle::face_weight(om, r, side);
      const int len = side < 2 ? n1 : n0;
      for (int t = 0; t < len; ++t) {
        const int node = side == 0 ? t * n0 : side == 1 ? n0 - 1 + t * n0 : side == 2 ? t : t + n0 * (n1 - 1);
        expect(om.offset[r] + node) += scale * (side < 2 ? ry.w[t] : rx.w[t]);
      }
    }
  }
  EXPECT_LT((Eigen::VectorXd(b1.diagonal()) - expect).cwiseAbs().maxCoeff(), 1e-12 * expect.maxCoeff());
}

TEST(Conforming, DfeUniformDiagonal) {
  // D_2 on [0,1] with alpha = 1 is {0, 1/2, 1}; the single interior Q1 node collects 4 * 2/3.
  const Mesh mesh = build_mesh({{Interval(0, 1), Interval(0, 1)}}, {{2, 2}});
  const NestedDyadicFamily fam = build_nested_family(2, Interval(-1, 1), 1.0);
  const DofMap dfe = build_dofmap(mesh, SpaceKind::kDfeCg, &fam);
  ASSERT_EQ(dfe.num_dofs(), 1);
  const SparseMatrix a = assemble_conforming(mesh, dfe);
  EXPECT_NEAR(a.coeff(0, 0), 8.0 / 3.0, 1e-14);
}

TEST(Conforming, SpdOnCheckerboard) {
  std::vector<Degree> d(9);
  for (int i = 0; i < 9; ++i) d[i] = i % 2 == 0 ? Degree{3, 3} : Degree{6, 6};
  const Mesh mesh = make_tensor_mesh({Interval(0, 3), Interval(0, 3)}, 3, 3, d);
  const NestedDyadicFamily fam = build_nested_family(6, Interval(-1, 1), 1.2);
  for (SpaceKind kind : {SpaceKind::kSeCg, SpaceKind::kDfeCg}) {
    const DofMap space = build_dofmap(mesh, kind, &fam);
    const Eigen::MatrixXd a = dense(assemble_conforming(mesh, space));
    EXPECT_LT((a - a.transpose()).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(a).info(), Eigen::Success);
  }
}

TEST(Conforming, SeCgIsTheGalerkinDgElementPart) {
  // On conforming functions the SE-CG stiffness equals S^T A_elem S.
  std::vector<Degree> d{{2, 2}, {4, 4}, {3, 3}, {4, 2}};
  const Mesh mesh = make_tensor_mesh({Interval(0, 2), Interval(0, 2)}, 2, 2, d);
  const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
  const DofMap cg = build_dofmap(mesh, SpaceKind::kSeCg);
  const SparseMatrix s = cg.global_prolongation();
  const Eigen::MatrixXd ref = dense(SparseMatrix(s.transpose() * assemble_element_stiffness(mesh, dg) * s));
  EXPECT_LT(rel_diff(dense(assemble_conforming(mesh, cg)), ref), 1e-12);
}

TEST(B2, IsotropicCellsGiveADiagonal) {
  const Mesh mesh = build_mesh({{Interval(0, 1), Interval(0, 1)}}, {{2, 2}});
  const DofMap cg = build_dofmap(mesh, SpaceKind::kSeCg);
  const SparseMatrix b2 = assemble_b2(cg, classify_anisotropy(cg, 2.0), 0.6);
  EXPECT_EQ(b2.nonZeros(), b2.rows());
  EXPECT_GT(b2.coeff(0, 0), 0.0);
}

TEST(B2, AnisotropicCouplingFollowsTheFlaggedDirection) {
  const Mesh mesh = build_mesh({{Interval(0, 1), Interval(0, 1)}}, {{25, 25}});
  const DofMap cg = build_dofmap(mesh, SpaceKind::kSeCg);
  const auto cls = classify_anisotropy(cg, 2.0);
  const auto& lat = cg.lattice(0);
  const SparseMatrix local = patch_b2(lat, cls.anisotropic[0], 0.6);
  const int n0 = lat.n(0), c0 = n0 - 1;
  int off = 0;
  for (int col = 0; col < local.outerSize(); ++col) {
    int per_direction[2] = {0, 0};
    for (SparseMatrix::InnerIterator it(local, col); it; ++it) {
      const int a = static_cast<int>(it.row()), b = col;
      if (a == b) continue;
      ++off;
      const int ai = a % n0, aj = a / n0, bi = b % n0, bj = b / n0;
      ASSERT_EQ(std::abs(ai - bi) + std::abs(aj - bj), 1);
      const int k = ai != bi ? 0 : 1;
      ++per_direction[k];
      // The edge between a and b must bound a cell that is anisotropic in direction k.
      bool flagged = false;
      if (k == 0) {
        const int i = std::min(ai, bi);
        for (int j : {aj - 1, aj})
          if (j >= 0 && j < lat.n(1) - 1) flagged |= cls.anisotropic[0][0][i + c0 * j] != 0;
      } else {
        const int j = std::min(aj, bj);
        for (int i : {ai - 1, ai})
          if (i >= 0 && i < c0) flagged |= cls.anisotropic[0][1][i + c0 * j] != 0;
      }
      EXPECT_TRUE(flagged);
    }
    EXPECT_LE(per_direction[0], 2);
    EXPECT_LE(per_direction[1], 2);
  }
  EXPECT_GT(off, 0);
}

TEST(B2, SingleAnisotropicCellAgainstIntegration) {
  // Cell [0,h]x[0,1] flagged in direction 0 only, c_tune = 0: u^T B u is the trapezoid rule in y of the
  // exact x-integral of (d_x u)^2.
  const double h = 0.1;
  PatchLattice lat;
  lat.coords = {std::vector<double>{0, h}, std::vector<double>{0, 1}};
  std::array<std::vector<char>, 2> flags{std::vector<char>{1}, std::vector<char>{0}};
  const Eigen::MatrixXd b = dense(patch_b2(lat, flags, 0.0));

  Eigen::Vector4d u(0, 1, 0, 1);  // linear in x, constant in y
  EXPECT_NEAR(u.dot(b * u), 1.0 / h, 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  const auto g = oracle::gauss(3, 0, h);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Vector4d v;
    for (int i = 0; i < 4; ++i) v(i) = dist(rng);
    double ref = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double slope = (v(1 + 2 * j) - v(2 * j)) / h;
      for (std::size_t q = 0; q < g.x.size(); ++q) ref += 0.5 * g.w[q] * slope * slope;
    }
    EXPECT_NEAR(v.dot(b * v), ref, 1e-12 * std::max(1.0, ref));
  }
}

TEST(B2, GlobalAssemblyIsSymmetricPositive) {
  std::vector<Degree> d(9);
  for (int i = 0; i < 9; ++i) d[i] = i % 2 == 0 ? Degree{8, 8} : Degree{16, 16};
  const Mesh mesh = make_tensor_mesh({Interval(0, 3), Interval(0, 3)}, 3, 3, d);
  const DofMap cg = build_dofmap(mesh, SpaceKind::kSeCg);
  const Eigen::MatrixXd b = dense(assemble_b2(cg, classify_anisotropy(cg, 2.0), 0.6));
  EXPECT_LT((b - b.transpose()).cwiseAbs().maxCoeff(), 1e-12 * b.cwiseAbs().maxCoeff());
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(b).info(), Eigen::Success);
}

TEST(Rhs, LglQuadratureOfTheSource) {
  const Case c{{{0, 1, 0, 1}, {1, 2, 0, 1.0}}, {{3, 2}, {5, 4}}};
  const Mesh mesh = library_mesh(c);
  const DofMap dg = build_dofmap(mesh, SpaceKind::kSeDg);
  EXPECT_NEAR(assemble_rhs_ni(mesh, dg, [](double, double) { return 1.0; }).sum(), 2.0, 1e-14);

  const auto f = [](double x, double y) { return std::exp(x) * std::cos(y); };
  const Eigen::VectorXd rhs = assemble_rhs_ni(mesh, dg, f);
  const auto om = oracle_mesh(c);
  for (int r = 0; r < 2; ++r) {
    const auto& p = om.patches[r];
    const auto rx = oracle::lobatto(p.degree[0], p.box[0], p.box[1]);
    const auto ry = oracle::lobatto(p.degree[1], p.box[2], p.box[3]);
    for (int j = 0; j <= p.degree[1]; ++j)
      for (int i = 0; i <= p.degree[0]; ++i) {
        const double ref = rx.w[i] * ry.w[j] * f(rx.x[i], ry.x[j]);
        EXPECT_NEAR(rhs(om.offset[r] + i + (p.degree[0] + 1) * j), ref, 1e-13);
      }
  }
}
