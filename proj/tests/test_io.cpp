#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coanda/error.hpp"
#include "coanda/io.hpp"
#include "coanda/solver.hpp"
#include "util.hpp"

using namespace coanda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("coanda_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& f) {
  std::ifstream is(f);
  std::vector<std::string> out;
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string t; std::getline(ss, t, ',');) out.push_back(t);
  return out;
}

Branch sample_branch() {
  Branch b;
  b.label = "a";
  b.model = "ns";
  for (int i = 0; i < 3; ++i) {
    BranchRecord r;
    r.mu = 2.0 - 0.5 * i;
    r.iterations = 3 + i;
    r.state = Vector::LinSpaced(7, 0.1 * i, 1.0 / 3.0 + i);
    r.outputs = {{"uy", 0.25 * i * i}, {"U", 10.0 + i}, {"Re", 25.0 / r.mu}, {"dp_up", 1.0}, {"dp_down", 2.0}};
    b.records.push_back(r);
  }
  return b;
}

const Mesh& fsi_mesh() {
  static const Mesh m = build_channel_mesh(ChannelGeometry{}, 0.8, MeshVariant::Fsi, true);
  return m;
}

}  // namespace

TEST(GitBlobHash, KnownValues) {
  // `git hash-object` of an empty file and of "hello\n".
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(GitBlobHash, FileMatchesContent) {
  const auto d = scratch("hash");
  write_text(d / "x.txt", "hello\n");
  EXPECT_EQ(git_blob_hash_file(d / "x.txt"), git_blob_hash("hello\n"));
  EXPECT_THROW(git_blob_hash_file(d / "missing"), IoError);
}

TEST(BranchIo, RoundTripIsExact) {
  const auto d = scratch("branch");
  const Branch b = sample_branch();
  save_branch(d, b);
  const Branch r = load_branch(d);
  EXPECT_EQ(r.label, b.label);
  EXPECT_EQ(r.model, b.model);
  ASSERT_EQ(r.records.size(), b.records.size());
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    EXPECT_EQ(r.records[i].mu, b.records[i].mu);
    EXPECT_EQ(r.records[i].iterations, b.records[i].iterations);
    EXPECT_EQ(r.records[i].outputs, b.records[i].outputs);
    EXPECT_EQ((r.records[i].state - b.records[i].state).cwiseAbs().maxCoeff(), 0.0);
  }
  const auto csv = lines_of(d / "branch.csv");
  EXPECT_EQ(csv.size(), 1 + b.records.size());
}

TEST(BranchIo, CorruptBlobIsReported) {
  const auto d = scratch("corrupt");
  save_branch(d, sample_branch());
  const auto f = d / "states.bin";
  fs::resize_file(f, fs::file_size(f) / 2);
  EXPECT_THROW(load_branch(d), IoError);
  EXPECT_THROW(load_branch(d / "nowhere"), IoError);
}

TEST(DiagramCsv, RigidColumnsAndOrder) {
  const auto d = scratch("diagram");
  write_diagram_csv(d / "d.csv", diagram(sample_branch()), false);
  const auto l = lines_of(d / "d.csv");
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0], "# coanda-diagram " + std::to_string(kDiagramSchema));
  EXPECT_EQ(l[1], "mu,Re,uy,U,dp_up,dp_down,branch,model");
  const auto row = split(l[3]);
  ASSERT_EQ(row.size(), 8u);
  EXPECT_DOUBLE_EQ(std::stod(row[0]), 1.5);
  EXPECT_DOUBLE_EQ(std::stod(row[2]), 0.25);
  EXPECT_EQ(row[6], "a");
  EXPECT_EQ(row[7], "ns");
}

TEST(DiagramCsv, SolidColumnsAndNormalizedDelta) {
  Branch b = sample_branch();
  for (std::size_t i = 0; i < b.records.size(); ++i) {
    auto& o = b.records[i].outputs;
    o["dmax_up"] = 1.0 + static_cast<double>(i);
    o["dmax_down"] = 1.0;
    o["delta_d"] = static_cast<double>(i);
  }
  const auto rows = diagram(b);
  EXPECT_DOUBLE_EQ(rows[1].delta_d_hat, 0.5);
  EXPECT_DOUBLE_EQ(rows[2].delta_d_hat, 1.0);
  const auto d = scratch("diagram_solid");
  write_diagram_csv(d / "d.csv", rows, true);
  EXPECT_EQ(lines_of(d / "d.csv")[1], "mu,Re,uy,U,dmax_up,dmax_down,delta_d,delta_d_hat,dp_up,dp_down,branch,model");
}

TEST(Vtk, ZeroStateHasValidHeaderAndZeroArrays) {
  const Mesh mesh = fixtures::straight_channel(4.0, 1.0, 0.5);
  const NsModel m(mesh, NsParams{});
  const auto d = scratch("vtk_zero");
  write_vtk(d / "z.vtk", m, Vector::Zero(static_cast<Eigen::Index>(m.size())));
  const auto l = lines_of(d / "z.vtk");
  ASSERT_GE(l.size(), 5u);
  EXPECT_EQ(l[0], "# vtk DataFile Version 3.0");
  EXPECT_EQ(l[2], "ASCII");
  EXPECT_EQ(l[3], "DATASET UNSTRUCTURED_GRID");
  bool in_data = false;
  int values = 0;
  for (const auto& s : l) {
    if (s.rfind("POINT_DATA", 0) == 0) in_data = true;
    if (s.rfind("CELL_DATA", 0) == 0) in_data = false;
    if (!in_data || s.empty() || std::isalpha(static_cast<unsigned char>(s[0]))) continue;
    std::istringstream is(s);
    for (double v; is >> v; ++values) EXPECT_EQ(v, 0.0);
  }
  EXPECT_GT(values, 0);
}

TEST(Vtk, PointsRoundTrip) {
  const Mesh mesh = fixtures::straight_channel(4.0, 1.0, 0.5);
  const NsModel m(mesh, NsParams{});
  const auto d = scratch("vtk_points");
  write_vtk(d / "p.vtk", m, Vector::Zero(static_cast<Eigen::Index>(m.size())));
  const auto pts = read_vtk_points(d / "p.vtk");
  const auto& v = m.velocity_space();
  ASSERT_EQ(pts.size(), v.n_nodes());
  double err = 0.0;
  for (std::size_t n = 0; n < v.n_nodes(); ++n) {
    const Point p = v.node_point(n);
    err = std::max({err, std::abs(pts[n].x - p.x), std::abs(pts[n].y - p.y)});
  }
  EXPECT_LE(err, 1e-15);
}

TEST(Vtk, DeformedSolidOffsetMatchesSolidOutputs) {
  const FsiModel m(fsi_mesh(), FsiParams{});
  const NewtonResult r = newton_solve(m, Vector::Zero(static_cast<Eigen::Index>(m.size())), 2.0, NewtonSettings{});
  const auto d = scratch("vtk_fsi");
  write_vtk(d / "ref.vtk", m, r.x, false);
  write_vtk(d / "def.vtk", m, r.x, true);
  const auto ref = read_vtk_points(d / "ref.vtk");
  const auto def = read_vtk_points(d / "def.vtk");
  ASSERT_EQ(ref.size(), def.size());
  const std::size_t nf = m.fluid_space().n_nodes();
  ASSERT_EQ(ref.size(), nf + m.solid_space().n_nodes());
  double offset = 0.0;
  for (std::size_t i = nf; i < ref.size(); ++i)
    offset = std::max(offset, std::hypot(def[i].x - ref[i].x, def[i].y - ref[i].y));
  const auto s = m.solid_outputs(r.x);
  const double expected = std::max(s.max_up, s.max_down);
  ASSERT_GT(expected, 0.0);
  EXPECT_NEAR(offset, expected, 1e-12 * expected + 1e-15);
}
