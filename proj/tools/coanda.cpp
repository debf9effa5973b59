// Command-line driver for the staged pipeline.
//
//   coanda <mesh|solve|sweep|offline|online|report> --config run.json --stage-dir out
//
// Exit codes: 0 ok, 1 other error, 2 Newton failed, 3 mesh inversion, 4 rank-deficient POD.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coanda/error.hpp"
#include "coanda/pipeline.hpp"

namespace {

int exit_code(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const coanda::PartialBranch& p) {
    std::cerr << "error: " << p.what() << " (" << p.branch().records.size() << " points kept)\n";
    if (p.cause()) return exit_code(p.cause());
    return 2;
  } catch (const coanda::MeshInversion& x) {
    std::cerr << "mesh inversion: " << x.what() << '\n';
    return 3;
  } catch (const coanda::NonConvergence& x) {
    std::cerr << "no convergence: " << x.what() << '\n';
    return 2;
  } catch (const coanda::RankDeficient& x) {
    std::cerr << "rank deficient: " << x.what() << '\n';
    return 4;
  } catch (const std::exception& x) {
    std::cerr << "error: " << x.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coanda channel flow: continuation sweeps and reduced basis"};
  app.require_subcommand(1, 1);

  std::string config_file;
  std::string stage_dir = "stages";
  std::optional<std::string> branch;
  std::optional<double> mu;
  int threads = 0;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_file, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--stage-dir", stage_dir, "directory holding stage artifacts")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  };
  auto* mesh = app.add_subcommand("mesh", "build and store the mesh");
  auto* solve = app.add_subcommand("solve", "single steady solve with outputs and VTK");
  auto* sweep = app.add_subcommand("sweep", "full-order continuation over the mu grid");
  auto* offline = app.add_subcommand("offline", "POD bases and supremizers from a training branch");
  auto* online = app.add_subcommand("online", "reduced sweep and error against the full order");
  auto* report = app.add_subcommand("report", "merged diagram and onset summary");
  for (auto* s : {mesh, solve, sweep, offline, online, report}) common(s);
  solve->add_option("--mu", mu, "viscosity (defaults to solve.mu)");
  sweep->add_option("--branch", branch, "only this branch label");
  online->add_option("--branch", branch, "branch label (defaults to rom.train_branch)");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = coanda::RunConfig::load(config_file);
    if (threads > 0) config.threads = threads;
    coanda::Pipeline p(std::move(config), stage_dir);
    if (*mesh) p.mesh();
    else if (*solve) p.solve(mu);
    else if (*sweep) p.sweep(branch);
    else if (*offline) p.offline();
    else if (*online) p.online(branch);
    else if (*report) p.report();
  } catch (...) {
    return exit_code(std::current_exception());
  }
  return 0;
}
