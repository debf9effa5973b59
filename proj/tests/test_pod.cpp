#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "coanda/assembly.hpp"
#include "coanda/error.hpp"
#include "coanda/fe_space.hpp"
#include "coanda/ns_model.hpp"
#include "coanda/pod_rom.hpp"
#include "coanda/solver.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace coanda;

namespace {

DenseMatrix random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  return DenseMatrix::NullaryExpr(r, c, [&](Eigen::Index, Eigen::Index) { return nd(rng); });
}

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

// SPD tridiagonal matrix with a varying diagonal.
SparseMatrix spd_matrix(Eigen::Index n) {
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, 3.0 + 0.1 * static_cast<double>(i % 7));
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double max_abs(const DenseMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

// Largest principal angle between the column spans of two orthonormal
// matrices of equal width, from the sines (acos loses half the digits).
double largest_angle(const DenseMatrix& a, const DenseMatrix& b) {
  const DenseMatrix r = b - a * (a.transpose() * b);
  return std::asin(std::min(1.0, Eigen::JacobiSVD<DenseMatrix>(r).singularValues()[0]));
}

SnapshotSet snapshots(DenseMatrix s) {
  SnapshotSet out;
  out.field = "x";
  for (Eigen::Index k = 0; k < s.cols(); ++k) out.mu.push_back(static_cast<double>(k));
  out.s = std::move(s);
  return out;
}

const Mesh& coarse_mesh() {
  static const Mesh m = build_channel_mesh(ChannelGeometry{}, 0.8, MeshVariant::Rigid, true);
  return m;
}

// Branch (a) of the coarse rigid channel on a short grid.
const Branch& training_branch() {
  static const Branch b = [] {
    const NsModel m(coarse_mesh(), NsParams{});
    BranchSpec spec;
    spec.mu = linspace(2.0, 0.5, 11);
    return continuation_sweep(m, select_branch_side(spec, Side::Upper, 0.1), NewtonSettings{});
  }();
  return b;
}

}  // namespace

TEST(Pod, MatchesDenseSvdWithIdentityNorm) {
  const DenseMatrix s = random_matrix(40, 10, 3);
  const PodBasis b = pod(snapshots(s), sparse_identity(40), 10);
  Eigen::JacobiSVD<DenseMatrix> svd(s, Eigen::ComputeThinU);
  const Vector ref = svd.singularValues();
  ASSERT_EQ(b.sigma.size(), 10);
  EXPECT_LE((b.sigma - ref).cwiseAbs().maxCoeff(), 1e-10 * ref[0]);
  EXPECT_NEAR(b.sigma_hat[0], 1.0, 0.0);
  EXPECT_LE(largest_angle(b.v, svd.matrixU()), 1e-8);
}

TEST(Pod, MatchesDenseSvdOfCholeskyFactorInMNorm) {
  const DenseMatrix s = random_matrix(40, 10, 4);
  const SparseMatrix m = spd_matrix(40);
  const PodBasis b = pod(snapshots(s), m, 6);
  // Dense oracle: M = R^T R and the M-norm POD is the SVD of R S.
  const DenseMatrix r = Eigen::LLT<DenseMatrix>(DenseMatrix(m)).matrixU();
  Eigen::JacobiSVD<DenseMatrix> svd(r * s, Eigen::ComputeThinU);
  EXPECT_LE((b.sigma - svd.singularValues()).cwiseAbs().maxCoeff(), 1e-10 * svd.singularValues()[0]);
  // The M-orthonormal modes map to the leading left singular vectors under R.
  EXPECT_LE(largest_angle(r * b.v, svd.matrixU().leftCols(6)), 1e-8);
}

TEST(Pod, BasisIsMOrthonormal) {
  const SparseMatrix m = spd_matrix(60);
  const PodBasis b = pod(snapshots(random_matrix(60, 12, 5)), m, 12);
  EXPECT_LE(max_abs(b.v.transpose() * m * b.v - DenseMatrix::Identity(12, 12)), 1e-10);
  for (Eigen::Index k = 1; k < b.sigma_hat.size(); ++k) EXPECT_LE(b.sigma_hat[k], b.sigma_hat[k - 1]);
}

TEST(Pod, IdenticalColumnsGiveRankOne) {
  const Vector col = random_matrix(30, 1, 6).col(0);
  const DenseMatrix s = col.replicate(1, 8);
  const SparseMatrix m = spd_matrix(30);
  const PodBasis b = pod(snapshots(s), m, 1);
  EXPECT_EQ(b.size(), 1);
  EXPECT_EQ(b.sigma_hat[0], 1.0);
  for (Eigen::Index k = 1; k < b.sigma_hat.size(); ++k) EXPECT_LT(b.sigma_hat[k], 1e-14);
  for (Eigen::Index k = 0; k < s.cols(); ++k)
    EXPECT_LE((project(b, m, s.col(k)) - s.col(k)).norm(), 1e-12 * col.norm());
  EXPECT_THROW(pod(snapshots(s), m, 2), RankDeficient);
}

TEST(Pod, OrthonormalPairSpansSamePlane) {
  const SparseMatrix m = spd_matrix(25);
  PodBasis q = pod(snapshots(random_matrix(25, 2, 7)), m, 2);
  // Equal weights: the Gramian of two M-orthonormal columns is the identity.
  const PodBasis b = pod(snapshots(q.v), m, 2);
  EXPECT_NEAR(b.sigma[0], 1.0, 1e-12);
  EXPECT_NEAR(b.sigma[1], 1.0, 1e-12);
  for (int k = 0; k < 2; ++k) EXPECT_LE((project(b, m, q.v.col(k)) - q.v.col(k)).norm(), 1e-12);
}

TEST(Pod, TooManyModesIsRankDeficient) {
  const DenseMatrix s = random_matrix(20, 4, 8);
  EXPECT_THROW(pod(snapshots(s), sparse_identity(20), 5), RankDeficient);
  DenseMatrix low(20, 4);
  low << s.leftCols(2), s.col(0) + s.col(1), 2.0 * s.col(1);
  EXPECT_THROW(pod(snapshots(low), sparse_identity(20), 3), RankDeficient);
  EXPECT_NO_THROW(pod(snapshots(low), sparse_identity(20), 2));
}

TEST(Pod, ProjectorIsIdempotent) {
  const SparseMatrix m = spd_matrix(50);
  const PodBasis b = pod(snapshots(random_matrix(50, 9, 9)), m, 5);
  const Vector x = random_matrix(50, 1, 10).col(0);
  const Vector px = project(b, m, x);
  EXPECT_LE((project(b, m, px) - px).norm(), 1e-12 * x.norm());
}

TEST(Supremizer, ZeroModeIsDropped) {
  const SparseMatrix m = spd_matrix(30);
  SparseMatrix b(30, 3);
  b.insert(4, 0) = 1.0;
  b.insert(9, 2) = -2.0;
  DenseMatrix dual = DenseMatrix::Zero(3, 2);
  dual(1, 0) = 1.0;  // hits the empty column of b
  dual(0, 1) = 1.0;
  const DenseMatrix s = supremizers(m, b, dual, DenseMatrix(30, 0));
  ASSERT_EQ(s.cols(), 1);
  EXPECT_NEAR((s.transpose() * m * s)(0, 0), 1.0, 1e-12);
}

TEST(Supremizer, NormalizedAndOrthogonalToPrimal) {
  const SparseMatrix m = spd_matrix(40);
  const SparseMatrix b = random_matrix(40, 5, 11).sparseView();
  const PodBasis primal = pod(snapshots(random_matrix(40, 6, 12)), m, 4);
  const DenseMatrix dual = Eigen::HouseholderQR<DenseMatrix>(random_matrix(5, 3, 13)).householderQ() *
                           DenseMatrix::Identity(5, 3);
  const DenseMatrix s = supremizers(m, b, dual, primal.v);
  ASSERT_EQ(s.cols(), 3);
  EXPECT_LE(max_abs(s.transpose() * m * s - DenseMatrix::Identity(3, 3)), 1e-12);
  EXPECT_LE(max_abs(primal.v.transpose() * m * s), 1e-12);
}

TEST(Supremizer, RestoresReducedInfSup) {
  const NsModel model(coarse_mesh(), NsParams{});
  const auto norms = block_norms(model.block_spaces(), model.layout(), *model.constrained());
  OfflineSettings plain;
  plain.n_rb = 4;
  plain.supremizers = false;
  OfflineSettings enriched = plain;
  enriched.supremizers = true;
  const auto& train = training_branch().records;
  const auto b0 = build_bases(model, train, norms, plain, 1.0);
  const auto b1 = build_bases(model, train, norms, enriched, 1.0);
  EXPECT_EQ(b1[0].n_supremizer, 4);
  EXPECT_EQ(b1[0].size(), 8);

  const auto& l = model.layout();
  const SparseMatrix j0 = model.sparse_jacobian(Vector::Zero(static_cast<Eigen::Index>(l.total())), 1.0);
  const SparseMatrix bup = j0.block(0, static_cast<Eigen::Index>(l.offset(1)), static_cast<Eigen::Index>(l.size(0)),
                                    static_cast<Eigen::Index>(l.size(1)));
  // Velocity snapshots are discretely divergence free, so their POD modes see no pressure.
  EXPECT_LT(reduced_inf_sup(bup, b0[0].v, b0[1].v), 1e-8 * bup.norm());
  EXPECT_GE(reduced_inf_sup(bup, b1[0].v, b1[1].v), 1e-8);

  // Condition numbers of the reduced Jacobians at a training point.
  const auto& rec = train[5];
  auto cond = [&](const std::vector<PodBasis>& bases) {
    const ReducedModel rom(model, bases, norms);
    const DenseMatrix j = DenseMatrix(rom.sparse_jacobian(rom.restrict(rec.state), rec.mu));
    const Vector sv = Eigen::JacobiSVD<DenseMatrix>(j).singularValues();
    return sv[0] / sv[sv.size() - 1];
  };
  const double c0 = cond(b0);
  const double c1 = cond(b1);
  EXPECT_GE(c0, 1e12);
  EXPECT_LE(c1, 1e-4 * c0);
}

TEST(ReducedModel, IdentityBasisReproducesNewtonIterates) {
  const Mesh mesh = fixtures::straight_channel(4.0, 1.0, 0.5);
  NsParams p;
  p.p_in = 5.0;
  const NsModel model(mesh, p);
  const auto& l = model.layout();
  std::vector<PodBasis> bases(l.n_blocks());
  std::vector<SparseMatrix> norms;
  for (std::size_t b = 0; b < l.n_blocks(); ++b) {
    const auto n = static_cast<Eigen::Index>(l.size(b));
    bases[b].field = l.name(b);
    bases[b].v = DenseMatrix::Identity(n, n);
    bases[b].n_pod = static_cast<int>(n);
    norms.push_back(sparse_identity(n));
  }
  const ReducedModel rom(model, bases, norms);
  ASSERT_EQ(rom.size(), model.size());
  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(model.size()));
  // Plain Newton steps on both models, compared step by step.
  Vector xf = x0, xr = x0;
  for (int k = 0; k < 4; ++k) {
    const Vector ff = model.residual(xf, 0.05);
    const Vector fr = rom.residual(xr, 0.05);
    ASSERT_LE((ff - fr).norm(), 1e-12 * std::max(1.0, ff.norm()));
    xf -= solve_sparse(model.sparse_jacobian(xf, 0.05), ff);
    NewtonWorkspace ws;
    Jacobian jr;
    rom.evaluate(xr, 0.05, nullptr, &jr);
    xr -= ws.solve(jr, fr);
    EXPECT_LE((xf - xr).norm(), 1e-10 * xf.norm()) << "iterate " << k + 1;
  }
  const NewtonResult a = newton_solve(model, x0, 0.05, NewtonSettings{});
  const NewtonResult b = newton_solve(rom, x0, 0.05, NewtonSettings{});
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_LE((a.x - rom.lift(b.x)).norm(), 1e-10 * a.x.norm());
}

TEST(ReducedModel, ReproducesSingleSnapshot) {
  const NsModel model(coarse_mesh(), NsParams{});
  const auto norms = block_norms(model.block_spaces(), model.layout(), *model.constrained());
  const BranchRecord& rec = training_branch().records[8];
  OfflineSettings s;
  s.n_rb = 1;
  const ReducedModel rom(model, build_bases(model, {rec}, norms, s, rec.mu), norms);
  const NewtonResult r = newton_solve(rom, Vector::Zero(static_cast<Eigen::Index>(rom.size())), rec.mu,
                                      NewtonSettings{});
  const Vector a = rom.restrict(rec.state);
  EXPECT_LE((r.x - a).norm(), 1e-8 * a.norm());
  EXPECT_LE((rom.lift(r.x) - rec.state).norm(), 1e-8 * rec.state.norm());
}

TEST(ReducedModel, JacobianMatchesFiniteDifferences) {
  const NsModel model(coarse_mesh(), NsParams{});
  const auto norms = block_norms(model.block_spaces(), model.layout(), *model.constrained());
  OfflineSettings s;
  s.n_rb = 3;
  const ReducedModel rom(model, build_bases(model, training_branch().records, norms, s, 1.0), norms);
  const auto& rec = training_branch().records[7];
  EXPECT_LE(fixtures::fd_jacobian_error(rom, rom.restrict(rec.state), rec.mu, 10), 1e-5);
}

TEST(ReducedModel, SeedIsProjectedLikeAResidual) {
  const NsModel model(coarse_mesh(), NsParams{});
  const auto norms = block_norms(model.block_spaces(), model.layout(), *model.constrained());
  OfflineSettings s;
  s.n_rb = 2;
  const auto bases = build_bases(model, training_branch().records, norms, s, 1.0);
  const ReducedModel rom(model, bases, norms);
  const Vector g = *model.antisymmetric_seed();
  const Vector gr = *rom.antisymmetric_seed();
  const auto nu = static_cast<Eigen::Index>(model.layout().size(0));
  EXPECT_LE((gr.head(bases[0].size()) - bases[0].v.transpose() * g.head(nu)).norm(), 1e-14 * g.norm());
}

TEST(RomErrors, SnapshotsInSpanAndBestApproximation) {
  const NsModel model(coarse_mesh(), NsParams{});
  const auto norms = block_norms(model.block_spaces(), model.layout(), *model.constrained());
  const auto& train = training_branch().records;
  const auto n_train = static_cast<int>(train.size());

  OfflineSettings all;
  all.n_rb = n_train;
  const ReducedModel full_rom(model, build_bases(model, train, norms, all, 1.0), norms);
  const RomErrors e_all = rom_errors(full_rom, train, {});
  for (const auto& [field, e] : e_all) {
    EXPECT_LE(e.proj, 1e-10) << field;
    EXPECT_TRUE(std::isnan(e.rb));
  }

  // With every snapshot in the basis, each training point is reproduced.
  for (const auto& rec : {train.front(), train[6], train.back()}) {
    const NewtonResult r = newton_solve(full_rom, full_rom.restrict(rec.state), rec.mu, NewtonSettings{});
    EXPECT_LE((full_rom.lift(r.x) - rec.state).norm(), 1e-8 * rec.state.norm()) << rec.mu;
  }

  OfflineSettings few;
  few.n_rb = 3;
  const ReducedModel rom(model, build_bases(model, train, norms, few, 1.0), norms);
  BranchSpec spec;
  for (const auto& r : train) spec.mu.push_back(r.mu);
  const Branch reduced = continuation_sweep(rom, select_branch_side(spec, Side::Upper, 0.1), NewtonSettings{});
  const RomErrors e = rom_errors(rom, train, reduced.records);
  for (const auto& [field, fe] : e) {
    EXPECT_GE(fe.rb, fe.proj - 1e-12) << field;
    EXPECT_GT(fe.proj, 0.0) << field;
  }

  BranchRecord shifted = reduced.records.front();
  shifted.mu += 0.01;
  std::vector<BranchRecord> bad = reduced.records;
  bad.front() = shifted;
  EXPECT_THROW(rom_errors(rom, train, bad), Error);
}

TEST(RomErrors, PointwiseErrorScaledByNorm) {
  const SparseMatrix m = sparse_identity(3);
  const Vector xh{{3.0, 0.0, 4.0}};
  const Vector xr{{3.0, 1.0, 2.0}};
  const Vector e = pointwise_error(xh, xr, m);
  EXPECT_DOUBLE_EQ(e[0], 0.0);
  EXPECT_DOUBLE_EQ(e[1], 0.2);
  EXPECT_DOUBLE_EQ(e[2], 0.4);
}

TEST(Snapshots, OrderedByParameter) {
  const NsModel model(coarse_mesh(), NsParams{});
  const auto& train = training_branch().records;
  const SnapshotSet s = collect_snapshots(model, train, "p");
  ASSERT_EQ(s.s.cols(), static_cast<Eigen::Index>(train.size()));
  for (std::size_t k = 1; k < s.mu.size(); ++k) EXPECT_LT(s.mu[k - 1], s.mu[k]);
  // The sweep runs downwards, so the first column is the last record.
  const auto np = static_cast<Eigen::Index>(model.layout().size(1));
  EXPECT_EQ(s.s.col(0), train.back().state.segment(static_cast<Eigen::Index>(model.layout().offset(1)), np));
  EXPECT_THROW(collect_snapshots(model, train, "d_s"), NotFound);
}

TEST(BasisIo, RoundTrip) {
  PodBasis b = pod(snapshots(random_matrix(30, 6, 14)), spd_matrix(30), 4, NormKind::H1);
  b.field = "d_f";
  b.v.conservativeResize(Eigen::NoChange, 5);
  b.v.col(4).setConstant(0.25);
  b.n_supremizer = 1;
  const auto file = std::filesystem::temp_directory_path() / "coanda_basis_roundtrip.bin";
  write_basis(file, b);
  const PodBasis r = read_basis(file);
  EXPECT_EQ(r.field, "d_f");
  EXPECT_EQ(r.norm, NormKind::H1);
  EXPECT_EQ(r.v, b.v);
  EXPECT_EQ(r.sigma, b.sigma);
  EXPECT_EQ(r.sigma_hat, b.sigma_hat);
  EXPECT_EQ(r.n_pod, 4);
  EXPECT_EQ(r.n_supremizer, 1);

  {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    os << "not a basis";
  }
  EXPECT_THROW(read_basis(file), IoError);
  std::filesystem::remove(file);
  EXPECT_THROW(read_basis(file), IoError);
}
