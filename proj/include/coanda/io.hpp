#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "coanda/fsi_model.hpp"
#include "coanda/ns_model.hpp"
#include "coanda/solver.hpp"

namespace coanda {

/// Branch persistence: a human-readable CSV (mu, iterations, outputs) plus a
/// binary blob holding every record, which is what `load_branch` reads back.
void save_branch(const std::filesystem::path& dir, const Branch& branch);
Branch load_branch(const std::filesystem::path& dir);
void write_branch_csv(const std::filesystem::path& file, const Branch& branch);

/// One row of a bifurcation diagram.
struct DiagramRecord {
  double mu = 0.0;
  double re = 0.0;
  double uy = 0.0;
  double u_mean = 0.0;
  double dmax_up = 0.0;
  double dmax_down = 0.0;
  double delta_d = 0.0;
  double delta_d_hat = 0.0;  ///< delta_d / max over the branch
  double dp_up = 0.0;
  double dp_down = 0.0;
  std::string branch;
  std::string model;
};

/// Diagram rows of a branch; delta_d_hat is normalized over this branch.
std::vector<DiagramRecord> diagram(const Branch& branch);

/// Current diagram CSV schema. The first line of every file is
/// "# coanda-diagram <version>"; docs/csv_schema.md lists the columns.
constexpr int kDiagramSchema = 1;

/// Writes rows in the fixed column order. Solid columns are written only when
/// `solid` is true.
void write_diagram_csv(const std::filesystem::path& file, const std::vector<DiagramRecord>& rows, bool solid);

/// VTK legacy ASCII unstructured grid of quadratic triangles (P2 nodes) with
/// point data u, p and, for FSI, the displacement d (d_f on fluid nodes and d_s
/// on solid nodes) and cell data `region` (0 fluid, 1 solid). With `deformed`
/// the points are moved to x + d.
void write_vtk(const std::filesystem::path& file, const NsModel& model, const Vector& x);
void write_vtk(const std::filesystem::path& file, const FsiModel& model, const Vector& x, bool deformed);

/// Point coordinates of a file written by write_vtk.
std::vector<Point> read_vtk_points(const std::filesystem::path& file);

/// Lowercase hex git blob hash (SHA-1 of "blob <size>\0" + content).
std::string git_blob_hash(const std::string& content);
std::string git_blob_hash_file(const std::filesystem::path& file);

std::string read_text(const std::filesystem::path& file);
/// Writes through a temporary file and renames, so readers never see partial files.
void write_text(const std::filesystem::path& file, const std::string& content);

}  // namespace coanda
