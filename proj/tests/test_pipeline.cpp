#include <gtest/gtest.h>

#include <filesystem>

#include "coanda/error.hpp"
#include "coanda/io.hpp"
#include "coanda/pipeline.hpp"

using namespace coanda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("coanda_test_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

// Coarse rigid channel, five points on [1.6, 2.0], branches a and c.
const char* kSmall = R"({
  "mesh": {"h_target": 0.8},
  "sweep": {"mu_min": 1.6, "mu_max": 2.0, "n_points": 5,
            "branches": [{"label": "a", "side": "upper"},
                         {"label": "c", "direction": "increasing", "symmetrize": true}]},
  "rom": {"n_rb": 3, "online_points": 9}
})";

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(RunConfig, DefaultsCarryTheChannelConstants) {
  const RunConfig c = RunConfig::parse("{}");
  EXPECT_EQ(c.mu_min, 0.5);
  EXPECT_EQ(c.mu_max, 2.0);
  EXPECT_EQ(c.n_points, 51);
  EXPECT_EQ(c.fluid.p_in, 450.0);
  EXPECT_EQ(c.offline.n_rb, 16);
  EXPECT_EQ(c.online_points, 101);
  ASSERT_EQ(c.branches.size(), 3u);
  EXPECT_EQ(c.branches[2].label, "c");
  EXPECT_TRUE(c.branches[2].symmetrize);
}

TEST(RunConfig, CanonicalJsonRoundTrips) {
  const RunConfig c = RunConfig::parse(kSmall);
  EXPECT_EQ(RunConfig::parse(c.to_json()).to_json(), c.to_json());
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_TRUE(contains(error_of([] { RunConfig::parse(R"({"sweep": {"npoints": 3}})"); }), "npoints"));
  EXPECT_TRUE(contains(error_of([] { RunConfig::parse(R"({"mesh": {"h_target": "fine"}})"); }), "h_target"));
  EXPECT_FALSE(error_of([] { RunConfig::parse(R"({"sweep": {"mu_min": 3.0}})"); }).empty());
  EXPECT_FALSE(error_of([] { RunConfig::parse("{ not json"); }).empty());
  EXPECT_FALSE(
      error_of([] { RunConfig::parse(R"({"physics": {"solid": {"E": 1e5, "nu": 0.3, "mu": 1e4}}})"); }).empty());
  EXPECT_FALSE(error_of([] {
                 RunConfig::parse(R"({"sweep": {"branches": [{"label": "a"}, {"label": "a"}]}})");
               }).empty());
}

TEST(RunConfig, YoungAndPoissonMapToLame) {
  const RunConfig c =
      RunConfig::parse(R"({"mesh": {"variant": "fsi"}, "physics": {"model": "fsi", "solid": {"E": 4.67e4, "nu": 0.21}}})");
  // mu = E / (2 (1 + nu)), lambda = E nu / ((1 + nu)(1 - 2 nu))
  EXPECT_NEAR(c.solid.mu, 4.67e4 / 2.42, 1e-9);
  EXPECT_NEAR(c.solid.lambda, 4.67e4 * 0.21 / (1.21 * 0.58), 1e-9);
}

TEST(RunConfig, FsiPhysicsNeedsSolidCells) {
  EXPECT_FALSE(error_of([] { RunConfig::parse(R"({"physics": {"model": "fsi"}})"); }).empty());
  RunConfig rigid = RunConfig::parse(kSmall);
  const Mesh mesh = build_mesh(rigid);
  RunConfig fsi = rigid;
  fsi.model = "fsi";
  EXPECT_THROW(build_model(fsi, mesh), ConfigError);
}

TEST(Pipeline, MissingStageIsNamed) {
  const auto dir = scratch("missing");
  Pipeline p(RunConfig::parse(kSmall), dir);
  EXPECT_TRUE(contains(error_of([&] { p.sweep(); }), "'mesh'"));
  p.mesh();
  EXPECT_TRUE(contains(error_of([&] { p.offline(); }), "'sweep'"));
  EXPECT_TRUE(contains(error_of([&] { p.online(); }), "'offline'"));
  EXPECT_TRUE(contains(error_of([&] { p.report(); }), "'sweep'"));
}

TEST(Pipeline, StaleMeshIsRejected) {
  const auto dir = scratch("stale");
  Pipeline(RunConfig::parse(kSmall), dir).mesh();
  RunConfig other = RunConfig::parse(kSmall);
  other.h_target = 0.7;
  Pipeline q(other, dir);
  EXPECT_TRUE(contains(error_of([&] { q.sweep(); }), "'mesh'"));
}

TEST(Pipeline, UnknownBranchIsRejected) {
  const auto dir = scratch("unknown_branch");
  Pipeline p(RunConfig::parse(kSmall), dir);
  p.mesh();
  EXPECT_THROW(p.sweep(std::string("z")), ConfigError);
}

// One full pass through every stage; later tests reuse the directory.
class PipelineRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = scratch("run");
    Pipeline p(RunConfig::parse(kSmall), dir_);
    p.mesh();
    p.sweep();
    p.offline();
    p.online();
    p.report();
  }
  static fs::path dir_;
};
fs::path PipelineRun::dir_;

TEST_F(PipelineRun, StagesWriteTheirArtifacts) {
  for (const char* f : {"mesh/mesh.txt", "fom/a/branch.csv", "fom/a/states.bin", "fom/a/diagram.csv",
                        "fom/c/diagram.csv", "offline/u.basis", "offline/p.basis", "offline/singular_values.csv",
                        "offline/projection_errors.csv", "online/a/diagram.csv", "online/rom_errors.csv",
                        "report/diagram.csv", "report/summary.json", "report/online_a.csv"})
    EXPECT_TRUE(fs::exists(dir_ / f)) << f;
  for (const char* s : {"mesh", "fom", "offline", "online", "report"})
    EXPECT_TRUE(fs::exists(dir_ / s / "manifest.json")) << s;
  EXPECT_EQ(load_branch(dir_ / "fom" / "a").records.size(), 5u);
}

TEST_F(PipelineRun, ManifestHashesMatchFiles) {
  const std::string m = read_text(dir_ / "fom" / "manifest.json");
  EXPECT_TRUE(contains(m, git_blob_hash_file(dir_ / "fom" / "a" / "diagram.csv")));
  EXPECT_TRUE(contains(m, git_blob_hash(RunConfig::parse(kSmall).to_json())));
}

TEST_F(PipelineRun, SweepIsDeterministic) {
  const auto dir = scratch("run_again");
  Pipeline p(RunConfig::parse(kSmall), dir);
  p.mesh();
  p.sweep(std::string("a"));
  EXPECT_EQ(read_text(dir / "fom" / "a" / "diagram.csv"), read_text(dir_ / "fom" / "a" / "diagram.csv"));
}

TEST_F(PipelineRun, OnlineStageIsReproducibleFromOfflineArtifacts) {
  const std::string diagram = read_text(dir_ / "online" / "a" / "diagram.csv");
  const std::string errors = read_text(dir_ / "online" / "rom_errors.csv");
  fs::remove_all(dir_ / "online");
  Pipeline(RunConfig::parse(kSmall), dir_).online();
  EXPECT_EQ(read_text(dir_ / "online" / "a" / "diagram.csv"), diagram);
  EXPECT_EQ(read_text(dir_ / "online" / "rom_errors.csv"), errors);
}

TEST_F(PipelineRun, SolveWritesOutputsAndVtk) {
  Pipeline p(RunConfig::parse(kSmall), dir_);
  p.solve(1.8);
  EXPECT_TRUE(contains(read_text(dir_ / "solve" / "outputs.json"), "\"uy\""));
  EXPECT_FALSE(read_vtk_points(dir_ / "solve" / "solution.vtk").empty());
}
