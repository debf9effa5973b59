#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coanda/fsi_model.hpp"
#include "coanda/mesh.hpp"
#include "coanda/ns_model.hpp"
#include "coanda/pod_rom.hpp"
#include "coanda/solver.hpp"

namespace coanda {

/// One branch of the sweep block.
struct BranchConfig {
  std::string label;
  /// Side of the antisymmetric forcing; empty for the symmetric branch.
  std::optional<Side> side;
  bool increasing = false;
  bool symmetrize = false;
};

/// Everything a pipeline run needs, read from a JSON file. Units are CGS.
struct RunConfig {
  ChannelGeometry geometry;

  double h_target = 0.4;
  bool symmetric = true;
  MeshVariant variant = MeshVariant::Rigid;
  std::string mesh_file;  ///< optional: native mesh or Gmsh .msh instead of the generator

  std::string model = "ns";  ///< "ns" or "fsi"
  NsParams fluid;
  MaterialParams solid;
  int multiplier_degree = 2;
  FlowProbes probes;

  double mu_min = 0.5;
  double mu_max = 2.0;
  int n_points = 51;
  std::vector<BranchConfig> branches;
  double amplitude = 0.1;
  double seed_until = 1e-3;
  int max_bisections = 4;

  NewtonSettings newton;

  OfflineSettings offline;
  std::string train_branch = "a";
  int online_points = 101;

  double solve_mu = 2.0;
  bool vtk = true;
  bool deformed = true;
  int threads = 1;

  /// Throws ConfigError on unknown keys, bad types or invalid ranges.
  static RunConfig parse(const std::string& json_text);
  static RunConfig load(const std::filesystem::path& file);
  /// Canonical JSON of the full configuration (stable key order).
  std::string to_json() const;
  void validate() const;

  const BranchConfig& branch(const std::string& label) const;
  BranchSpec branch_spec(const BranchConfig& b, int n_points) const;
  std::vector<double> grid(int n, bool increasing) const;
};

/// Stage driver over a stage directory:
///   mesh/     mesh.txt
///   fom/      <branch>/{branch.csv, states.bin, diagram.csv}
///   offline/  <field>.basis, singular_values.csv, projection_errors.csv
///   online/   <branch>/diagram.csv, rom_errors.csv
///   report/   diagram.csv, summary.json
///   solve/    outputs.json, solution.vtk
/// Every stage writes manifest.json (config hash, input and output blob
/// hashes, wall clock). Stages read only the artifacts of earlier stages.
class Pipeline {
 public:
  Pipeline(RunConfig config, std::filesystem::path stage_dir);
  ~Pipeline();

  void mesh();
  void solve(std::optional<double> mu = std::nullopt);
  /// Full-order sweeps of all configured branches, or of one.
  void sweep(const std::optional<std::string>& branch = std::nullopt);
  void offline();
  void online(const std::optional<std::string>& branch = std::nullopt);
  void report();

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// The mesh of the mesh stage (loaded on first use) and the model built on it.
  const Mesh& loaded_mesh();
  const Model& model();

 private:
  void require(const std::filesystem::path& artifact, const std::string& stage) const;

  RunConfig config_;
  std::filesystem::path dir_;
  std::unique_ptr<Mesh> mesh_;
  std::unique_ptr<Model> model_;
};

/// Mesh built from a configuration (generator or file).
Mesh build_mesh(const RunConfig& config);
/// Full-order model of a configuration on `mesh`. Throws ConfigError when the
/// physics does not match the mesh (FSI needs solid cells).
std::unique_ptr<Model> build_model(const RunConfig& config, const Mesh& mesh);

}  // namespace coanda
