#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coanda/assembly.hpp"
#include "coanda/error.hpp"
#include "coanda/fe_space.hpp"
#include "coanda/linalg.hpp"
#include "coanda/quadrature.hpp"
#include "util.hpp"

using namespace coanda;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of xi^a eta^b over the reference triangle.
double monomial_exact(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

}  // namespace

TEST(Quadrature, WeightsSumToHalf) {
  for (int order = 1; order <= 6; ++order) {
    const auto& r = triangle_rule(order);
    double s = 0.0;
    for (double w : r.weights) s += w;
    EXPECT_NEAR(s, 0.5, 1e-14) << order;
  }
}

TEST(Quadrature, TriangleRulesExactToDeclaredOrder) {
  for (int order = 1; order <= 6; ++order) {
    const auto& r = triangle_rule(order);
    for (int a = 0; a <= order; ++a) {
      for (int b = 0; a + b <= order; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < r.size(); ++q)
          s += r.weights[q] * std::pow(r.points[q][1], a) * std::pow(r.points[q][2], b);
        EXPECT_NEAR(s, monomial_exact(a, b), 1e-14) << "order " << order << " x^" << a << " y^" << b;
      }
    }
  }
}

TEST(Quadrature, LineRulesExact) {
  for (int order = 0; order <= 9; ++order) {
    const auto& r = line_rule(order);
    for (int k = 0; k <= order; ++k) {
      double s = 0.0;
      for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.points[q], k);
      EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14);
    }
  }
}

TEST(Quadrature, UnavailableOrderThrows) {
  EXPECT_THROW(triangle_rule(7), Error);
  EXPECT_THROW(line_rule(10), Error);
}

TEST(Basis, PartitionOfUnityAndNodality) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int deg : {1, 2}) {
    for (int t = 0; t < 20; ++t) {
      double a = u(rng), b = u(rng);
      if (a + b > 1.0) {
        a = 1.0 - a;
        b = 1.0 - b;
      }
      double v[6], g[6][2];
      reference_basis(deg, {1.0 - a - b, a, b}, v, g);
      double s = 0.0, gx = 0.0, gy = 0.0;
      for (int i = 0; i < n_local_nodes(deg); ++i) {
        s += v[i];
        gx += g[i][0];
        gy += g[i][1];
      }
      EXPECT_NEAR(s, 1.0, 1e-14);
      EXPECT_NEAR(gx, 0.0, 1e-13);
      EXPECT_NEAR(gy, 0.0, 1e-13);
    }
  }
  const std::array<std::array<double, 3>, 6> nodes{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {.5, .5, 0}, {0, .5, .5}, {.5, 0, .5}}};
  for (int j = 0; j < 6; ++j) {
    double v[6];
    reference_basis(2, nodes[j], v, nullptr);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(v[i], i == j ? 1.0 : 0.0, 1e-15);
  }
}

TEST(FeSpace, DofCountsOnUnitSquare) {
  const Mesh m = fixtures::unit_square();
  EXPECT_EQ(FeSpace(m, 1, 1, Restriction::All).n_dofs(), 4u);
  EXPECT_EQ(FeSpace(m, 2, 1, Restriction::All).n_dofs(), 9u);
  EXPECT_EQ(FeSpace(m, 2, 2, Restriction::Fluid).n_dofs(), 18u);
  EXPECT_THROW(FeSpace(m, 1, 1, Restriction::Solid), Error);
  EXPECT_THROW(FeSpace(m, 3, 1, Restriction::All), Error);
  EXPECT_THROW(FeSpace(m, 1, 1, Restriction::Interface), Error);
}

TEST(FeSpace, ChannelDofCounts) {
  const Mesh m = build_channel_mesh(ChannelGeometry{}, 0.5, MeshVariant::Fsi, true);
  const FeSpace uf(m, 2, 2, Restriction::Fluid);
  const FeSpace ds(m, 2, 2, Restriction::Solid);
  const FeSpace all(m, 2, 1, Restriction::All);
  const FeSpace lam(m, 1, 2, Restriction::Interface);
  EXPECT_EQ(all.n_dofs(), m.n_vertices() + m.n_edges());
  std::size_t n_if = 0;
  for (const auto& f : m.facets()) n_if += f.tag == BoundaryTag::FsiInterface;
  // Two open polylines, one per leaflet.
  EXPECT_EQ(lam.n_nodes(), n_if + 2);
  EXPECT_EQ(uf.n_nodes() + ds.n_nodes() - (2 * n_if + 2), all.n_nodes());
}

TEST(Assembly, StiffnessMatchesHandAssembly) {
  const Mesh m = fixtures::unit_square();
  const FeSpace s(m, 1, 1, Restriction::All);
  const DenseMatrix k = DenseMatrix(stiffness_matrix(s));
  DenseMatrix hand(4, 4);
  hand << 1, -.5, 0, -.5, -.5, 1, -.5, 0, 0, -.5, 1, -.5, -.5, 0, -.5, 1;
  // Space nodes follow vertex order on this mesh.
  EXPECT_LT((k - hand).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assembly, MassRowSumsPartitionArea) {
  const Mesh m = build_channel_mesh(ChannelGeometry{}, 0.7, MeshVariant::Rigid, true);
  const double area = 375.0 - 5.0;
  for (int deg : {1, 2}) {
    const FeSpace s(m, deg, 1, Restriction::Fluid);
    const SparseMatrix mm = mass_matrix(s);
    const Vector one = Vector::Ones(static_cast<Eigen::Index>(s.n_dofs()));
    EXPECT_NEAR((mm * one).sum(), area, 1e-10 * area);
    EXPECT_NEAR(one.dot(norm_matrix(s, NormKind::L2) * one), area, 1e-10 * area);
    EXPECT_NEAR(one.dot(norm_matrix(s, NormKind::H1) * one), area, 1e-10 * area);
  }
}

TEST(Assembly, H1NormOfLinearField) {
  const Mesh m = fixtures::unit_square();
  for (int deg : {1, 2}) {
    const FeSpace s(m, deg, 1, Restriction::All);
    const Vector x = interpolate(s, [](const Point& p, double* v) { v[0] = p.x; });
    EXPECT_NEAR(x.dot(norm_matrix(s, NormKind::H1) * x), 1.0 / 3.0 + 1.0, 1e-14);
  }
}

TEST(Assembly, InterfaceMassMeasuresInterfaceLength) {
  const Mesh m = build_channel_mesh(ChannelGeometry{}, 0.5, MeshVariant::Fsi, true);
  const FeSpace lam(m, 1, 2, Restriction::Interface);
  const SparseMatrix mm = mass_matrix(lam);
  Vector ex = Vector::Zero(static_cast<Eigen::Index>(lam.n_dofs()));
  for (std::size_t n = 0; n < lam.n_nodes(); ++n) ex[static_cast<Eigen::Index>(lam.dof(n, 0))] = 1.0;
  EXPECT_NEAR(ex.dot(mm * ex), 12.0, 1e-12);
}

TEST(Assembly, DirichletRowsAndColumns) {
  const Mesh m = fixtures::unit_square();
  const FeSpace s(m, 1, 1, Restriction::All);
  PatternBuilder pb(4, 4);
  pb.add_diagonal();
  SparseMatrix k = stiffness_matrix(s);
  std::vector<char> fixed{1, 0, 0, 0};
  apply_dirichlet(k, fixed);
  const DenseMatrix d(k);
  EXPECT_EQ(d(0, 0), 1.0);
  for (int i = 1; i < 4; ++i) {
    EXPECT_EQ(d(0, i), 0.0);
    EXPECT_EQ(d(i, 0), 0.0);
  }
}

TEST(Interpolation, PatchTest) {
  const Mesh m = build_channel_mesh(ChannelGeometry{}, 0.6, MeshVariant::Rigid, false);
  const PointLocator loc(m);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(0.0, 50.0), uy(0.0, 7.5);
  std::vector<Point> pts;
  while (pts.size() < 100) {
    Point p{ux(rng), uy(rng)};
    if (p.x > 5.0 && p.x < 6.0 && (p.y < 2.5 || p.y > 5.0)) continue;
    pts.push_back(p);
  }
  auto lin = [](const Point& p) { return 0.3 - 0.2 * p.x + 1.7 * p.y; };
  auto quad = [](const Point& p) { return 0.5 + p.x * p.x - 0.3 * p.x * p.y + 0.25 * p.y * p.y - p.y; };
  const FeSpace p1(m, 1, 1, Restriction::Fluid);
  const FeSpace p2(m, 2, 2, Restriction::Fluid);
  const Vector c1 = interpolate(p1, [&](const Point& p, double* v) { v[0] = lin(p); });
  const Vector c2 = interpolate(p2, [&](const Point& p, double* v) {
    v[0] = quad(p);
    v[1] = lin(p);
  });
  for (const auto& p : pts) {
    EXPECT_NEAR(evaluate_field(p1, loc, c1, p), lin(p), 1e-11 * (1 + std::abs(lin(p))));
    EXPECT_NEAR(evaluate_field(p2, loc, c2, p, 0), quad(p), 1e-11 * (1 + std::abs(quad(p))));
    EXPECT_NEAR(evaluate_field(p2, loc, c2, p, 1), lin(p), 1e-11 * (1 + std::abs(lin(p))));
    const auto g = evaluate_gradient(p2, loc, c2, p, 0);
    EXPECT_NEAR(g[0], 2 * p.x - 0.3 * p.y, 1e-9);
    EXPECT_NEAR(g[1], -0.3 * p.x + 0.5 * p.y - 1.0, 1e-9);
  }
}

TEST(Interpolation, P1CentroidIsVertexAverage) {
  const Mesh m = fixtures::unit_square();
  const PointLocator loc(m);
  const FeSpace p1(m, 1, 1, Restriction::All);
  const Vector c = interpolate(p1, [](const Point& p, double* v) { v[0] = p.x * p.x; });
  // Cell 0 = (0,0),(1,0),(1,1): vertex values 0, 1, 1.
  EXPECT_NEAR(evaluate_field(p1, loc, c, m.centroid(0)), 2.0 / 3.0, 1e-15);
  const Vector one = interpolate(p1, [](const Point&, double* v) { v[0] = 1.0; });
  EXPECT_NEAR(evaluate_field(p1, loc, one, {0.3, 0.6}), 1.0, 1e-15);
  EXPECT_THROW(evaluate_field(p1, loc, one, {1.5, 0.5}), NotFound);
}

TEST(FieldError, ZeroForInterpolatedQuadratic) {
  const Mesh m = fixtures::straight_channel(2.0, 1.0, 0.25);
  const FeSpace p2(m, 2, 1, Restriction::All);
  const Vector c = interpolate(p2, [](const Point& p, double* v) { v[0] = p.x * p.y; });
  const auto e = field_error(p2, c, [](const Point& p, double* v, double (*g)[2]) {
    v[0] = p.x * p.y;
    g[0][0] = p.y;
    g[0][1] = p.x;
  });
  EXPECT_LT(e.h1(), 1e-13);
}

TEST(SparseSolve, IdentityAndPermutation) {
  SparseMatrix id(3, 3);
  id.setIdentity();
  Vector b(3);
  b << 1, 2, 3;
  EXPECT_LT((solve_sparse(id, b) - b).norm(), 1e-15);
  SparseMatrix p(2, 2);
  p.insert(0, 1) = 1.0;
  p.insert(1, 0) = 1.0;
  Vector b2(2);
  b2 << 1, 2;
  const Vector x = solve_sparse(p, b2);
  EXPECT_DOUBLE_EQ(x[0], 2.0);
  EXPECT_DOUBLE_EQ(x[1], 1.0);
}

TEST(SparseSolve, RandomSpdMatchesDenseLu) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> idx(0, 49);
  DenseMatrix r = DenseMatrix::Zero(50, 50);
  for (int k = 0; k < 200; ++k) r(idx(rng), idx(rng)) = u(rng);
  DenseMatrix a = r.transpose() * r + DenseMatrix::Identity(50, 50);
  SparseMatrix s = a.sparseView();
  Vector b = Vector::NullaryExpr(50, [&](Eigen::Index) { return u(rng); });
  const Vector x = solve_sparse(s, b);
  const Vector xd = a.partialPivLu().solve(b);
  EXPECT_LT((x - xd).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((a * x - b).norm(), 1e-10 * (a.norm() * x.norm() + b.norm()));
}

TEST(SparseSolve, SaddlePointNeedsPivoting) {
  // [[I, B^T],[B, 0]] with a zero diagonal block.
  DenseMatrix a(3, 3);
  a << 2, 0, 1, 0, 2, 1, 1, 1, 0;
  SparseMatrix s = a.sparseView();
  Vector b(3);
  b << 1, 2, 3;
  const Vector x = solve_sparse(s, b);
  EXPECT_LT((a * x - b).norm(), 1e-13);
}

TEST(SparseSolve, SingularMatrixReportsPivot) {
  DenseMatrix a(3, 3);
  a << 1, 2, 0, 2, 4, 0, 0, 0, 1;
  SparseMatrix s = a.sparseView();
  try {
    solve_sparse(s, Vector::Ones(3));
    FAIL() << "expected SingularMatrix";
  } catch (const SingularMatrix& e) {
    EXPECT_GE(e.pivot(), 0);
    EXPECT_LE(e.pivot(), 1);
  }
}

TEST(SparseSolve, SymbolicFactorizationReused) {
  const Mesh m = fixtures::unit_square();
  const FeSpace s(m, 2, 1, Restriction::All);
  SparseMatrix a = norm_matrix(s, NormKind::H1);
  SparseLu lu;
  lu.factorize(a);
  a *= 2.0;
  lu.factorize(a);
  EXPECT_EQ(lu.symbolic_count(), 1u);
  const Vector b = Vector::Ones(a.rows());
  EXPECT_LT((a * lu.solve(b) - b).norm(), 1e-12);
}

TEST(BlockLayout, OffsetsAndLookup) {
  BlockLayout l;
  l.add("u", 10);
  l.add("p", 3);
  EXPECT_EQ(l.total(), 13u);
  EXPECT_EQ(l.offset(l.index("p")), 10u);
  EXPECT_THROW(l.index("d_f"), NotFound);
  EXPECT_THROW(l.add("u", 1), Error);
  BlockState s(l);
  s.block("p").setConstant(2.0);
  EXPECT_EQ(s.values.sum(), 6.0);
  EXPECT_THROW(BlockState(l, Vector::Zero(4)), Error);
}
