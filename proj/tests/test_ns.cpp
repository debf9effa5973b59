#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "coanda/assembly.hpp"
#include "coanda/error.hpp"
#include "coanda/ns_model.hpp"
#include "coanda/solver.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace coanda;

namespace {

Vector random_state(const Model& m, double amp, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  return Vector::NullaryExpr(static_cast<Eigen::Index>(m.size()), [&](Eigen::Index) { return u(rng); });
}

const Mesh& channel_mesh() {
  static const Mesh m = build_channel_mesh(ChannelGeometry{}, 0.5, MeshVariant::Rigid, true);
  return m;
}

}  // namespace

TEST(NsResidual, ZeroStateUnloaded) {
  NsParams p;
  p.p_in = 0.0;
  const NsModel m(channel_mesh(), p);
  EXPECT_EQ(m.residual(Vector::Zero(static_cast<Eigen::Index>(m.size())), 1.0).norm(), 0.0);
}

TEST(NsResidual, InletLoadOnlyTouchesInletRows) {
  const NsModel m(channel_mesh(), NsParams{});
  const Vector f = m.residual(Vector::Zero(static_cast<Eigen::Index>(m.size())), 1.0);
  const auto& u = m.velocity_space();
  std::vector<char> inlet(m.size(), 0);
  for (auto n : u.boundary_nodes(BoundaryTag::Inlet)) inlet[u.dof(n, 0)] = inlet[u.dof(n, 1)] = 1;
  double inlet_sum = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (!inlet[static_cast<std::size_t>(i)]) EXPECT_EQ(f[i], 0.0) << i;
    else inlet_sum += f[i];
  }
  // Integral of p_in n_x over the inlet (n = -e_x, height 7.5); wall corners are eliminated.
  EXPECT_LT(inlet_sum, 0.0);
  EXPECT_GT(f.norm(), 0.0);
}

TEST(NsJacobian, FiniteDifferenceCheck) {
  const NsModel m(channel_mesh(), NsParams{});
  const Vector x = random_state(m, 10.0, 3);
  EXPECT_LE(fixtures::fd_jacobian_error(m, x, 0.8, 10), 1e-5);
}

TEST(NsJacobian, StokesAtZeroAndConvectionFreeLinearity) {
  NsParams with;
  NsParams without;
  without.convection = false;
  const NsModel a(channel_mesh(), with);
  const NsModel b(channel_mesh(), without);
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(a.size()));
  const SparseMatrix ja = a.sparse_jacobian(zero, 1.3);
  const SparseMatrix jb = b.sparse_jacobian(zero, 1.3);
  EXPECT_EQ((ja - jb).norm(), 0.0);
  // With rho = 0 the residual is linear: the Jacobian does not depend on the state.
  NsParams lin;
  lin.rho = 1e-300;
  const NsModel c(channel_mesh(), with);
  NsParams zero_rho;
  zero_rho.convection = false;
  const NsModel d(channel_mesh(), zero_rho);
  const SparseMatrix j1 = d.sparse_jacobian(random_state(d, 5.0, 1), 1.0);
  const SparseMatrix j2 = d.sparse_jacobian(random_state(d, 5.0, 2), 1.0);
  EXPECT_LE((j1 - j2).norm(), 1e-13 * j1.norm());
  // Symmetric apart from Dirichlet elimination: Stokes saddle point at u = 0.
  const SparseMatrix jt = SparseMatrix(jb.transpose());
  EXPECT_LE((jb - jt).norm(), 1e-12 * jb.norm());
}

TEST(NsJacobian, ParallelAssemblyMatchesSerial) {
  const NsModel m(channel_mesh(), NsParams{});
  const Vector x = random_state(m, 3.0, 9);
  set_num_threads(1);
  Vector f1;
  Jacobian j1;
  m.evaluate(x, 1.1, &f1, &j1);
  set_num_threads(4);
  Vector f4;
  Jacobian j4;
  m.evaluate(x, 1.1, &f4, &j4);
  set_num_threads(1);
  const auto& a = std::get<SparseMatrix>(j1);
  const auto& b = std::get<SparseMatrix>(j4);
  ASSERT_EQ(a.nonZeros(), b.nonZeros());
  for (Eigen::Index k = 0; k < a.nonZeros(); ++k) EXPECT_EQ(a.valuePtr()[k], b.valuePtr()[k]);
  EXPECT_EQ((f1 - f4).norm(), 0.0);
}

TEST(NsSolve, StokesConvergesInOneIteration) {
  NsParams p;
  p.convection = false;
  const NsModel m(channel_mesh(), p);
  const auto res = newton_solve(m, random_state(m, 1.0, 4), 1.0, NewtonSettings{});
  EXPECT_EQ(res.iterations, 1);
}

TEST(NsSolve, PoiseuilleWithExactStressData) {
  fixtures::Poiseuille ex;
  ex.p_in = 450.0;
  ex.mu = 2.0;
  ex.length = 50.0;
  ex.height = 7.5;
  NsParams p;
  p.convection = false;
  p.p_in = ex.p_in;
  p.traction = [&](const Point& q, const Point& n, BoundaryTag, double* t) { ex.traction(q, n, t); };
  const Mesh mesh = fixtures::straight_channel(50.0, 7.5, 0.5);
  const NsModel m(mesh, p);
  const auto res = newton_solve(m, Vector::Zero(static_cast<Eigen::Index>(m.size())), ex.mu, NewtonSettings{});
  const Vector u = res.x.head(static_cast<Eigen::Index>(m.velocity_space().n_dofs()));
  const auto err = field_error(m.velocity_space(), u, [&](const Point& q, double* v, double (*g)[2]) { ex.velocity(q, v, g); });
  Vector zero = Vector::Zero(u.size());
  const auto norm = field_error(m.velocity_space(), zero, [&](const Point& q, double* v, double (*g)[2]) { ex.velocity(q, v, g); });
  // P2 reproduces the quadratic profile exactly.
  EXPECT_LE(err.h1() / norm.h1(), 1e-10);
}

TEST(NsSolve, MassConservation) {
  const NsModel m(channel_mesh(), NsParams{});
  const auto res = newton_solve(m, Vector::Zero(static_cast<Eigen::Index>(m.size())), 2.0, NewtonSettings{});
  const double in = m.boundary_flux(res.x, BoundaryTag::Inlet);
  const double out = m.boundary_flux(res.x, BoundaryTag::Outlet);
  const double wall = m.boundary_flux(res.x, BoundaryTag::Wall);
  EXPECT_LT(in, 0.0);
  EXPECT_LE(std::abs(in + out + wall), 1e-8 * std::abs(in));
}

TEST(NsSolve, QuadraticConvergenceAndSymmetry) {
  const NsModel m(channel_mesh(), NsParams{});
  const auto res = newton_solve(m, Vector::Zero(static_cast<Eigen::Index>(m.size())), 2.0, NewtonSettings{});
  EXPECT_LE(res.history.back(), 1e-9);
  // Reflection equivariance: the mirrored state solves the system too.
  const Vector r = *m.reflect(res.x);
  EXPECT_LE(m.residual(r, 2.0).norm(), 1e-9 * std::max(1.0, res.x.norm()));
  // Symmetric regime: vertical velocity on the axis vanishes.
  Vector u = res.x.head(static_cast<Eigen::Index>(m.velocity_space().n_dofs()));
  EXPECT_LE(std::abs(m.output_uy(res.x)), 1e-6 * u.cwiseAbs().maxCoeff());
  // Mirrored state negates u_y.
  const Vector s = random_state(m, 1.0, 21);
  EXPECT_NEAR(m.output_uy(*m.reflect(s)), -m.output_uy(s), 1e-12);
}

TEST(NsOutputs, PressureDropsSymmetricForMirroredProbes) {
  // The default probes (y = 6 and y = 1) are not mirror images about
  // y = 3.75; with mirrored probes a symmetric state gives equal drops.
  FlowProbes probes;
  probes.p_down_in = {4.5, 1.5};
  probes.p_down_out = {6.5, 1.5};
  const NsModel m(channel_mesh(), NsParams{}, probes);
  const auto res = newton_solve(m, Vector::Zero(static_cast<Eigen::Index>(m.size())), 2.0, NewtonSettings{});
  const auto [up, down] = m.pressure_drops(res.x);
  EXPECT_NEAR(up, down, 1e-8 * std::abs(up));
  const Vector p = Vector::Constant(static_cast<Eigen::Index>(m.size()), 3.0);
  const auto [cu, cd] = m.pressure_drops(p);
  EXPECT_NEAR(cu, 0.0, 1e-12);
  EXPECT_NEAR(cd, 0.0, 1e-12);
}

TEST(NsOutputs, ReynoldsAndProfile) {
  EXPECT_DOUBLE_EQ(reynolds(1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(reynolds(30.0, 2.5, 1.0), 75.0);
  EXPECT_DOUBLE_EQ(reynolds(60.0, 2.5, 1.0), 2.0 * reynolds(30.0, 2.5, 1.0));
  const NsModel m(channel_mesh(), NsParams{});
  const Profile z = m.expansion_profile(Vector::Zero(static_cast<Eigen::Index>(m.size())), 11);
  EXPECT_EQ(z.samples.size(), 11u);
  EXPECT_EQ(z.max_speed, 0.0);
}

TEST(NsOutputs, PoiseuilleProfilePeaksAtMidline) {
  fixtures::Poiseuille ex;
  ex.length = 50.0;
  ex.height = 7.5;
  const Mesh mesh = fixtures::straight_channel(50.0, 7.5, 0.5, true);
  FlowProbes probes;
  probes.section_lo = 0.0;
  probes.section_hi = 7.5;
  const NsModel m(mesh, NsParams{}, probes);
  Vector x = Vector::Zero(static_cast<Eigen::Index>(m.size()));
  x.head(static_cast<Eigen::Index>(m.velocity_space().n_dofs())) =
      interpolate(m.velocity_space(), [&](const Point& q, double* v) {
        v[0] = ex.ux(q.y);
        v[1] = 0.0;
      });
  const Profile pr = m.expansion_profile(x, 31);
  std::size_t arg = 0;
  for (std::size_t i = 0; i < pr.samples.size(); ++i)
    if (pr.samples[i].speed > pr.samples[arg].speed) arg = i;
  EXPECT_NEAR(pr.samples[arg].y, 3.75, 1e-12);
  EXPECT_NEAR(pr.max_speed, ex.ux(3.75), 1e-12);
  for (const auto& s : pr.samples) EXPECT_NEAR(s.speed, ex.ux(s.y), 1e-11);
}
