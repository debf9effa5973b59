#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "coanda/linalg.hpp"
#include "coanda/mesh.hpp"

namespace coanda {

enum class Restriction { All, Fluid, Solid, Interface };

const char* to_string(Restriction r);

/// Lagrange basis on the reference triangle, degree 1 or 2.
/// Degree-2 local order: vertices 0,1,2 then midpoints of edges (0,1), (1,2), (2,0).
int n_local_nodes(int degree);
void reference_basis(int degree, const std::array<double, 3>& bary, double* values,
                     double (*grads)[2]);

/// Lagrange basis on a segment parametrized by t in [0,1]; order (a, b[, mid]).
void segment_basis(int degree, double t, double* values);

/// Affine map of one cell: x = x0 + A (xi, eta).
struct CellMap {
  Eigen::Matrix2d a;
  Eigen::Matrix2d inv_t;  ///< A^{-T}, maps reference gradients to physical ones
  double det = 0.0;
  Point origin;

  CellMap(const Mesh& mesh, std::size_t cell);
  Point map(const std::array<double, 3>& bary) const;
};

/// Scalar or vector Lagrange space on a restriction of the mesh.
///
/// Global dof of (node, component) is node * components + component.
class FeSpace {
 public:
  FeSpace(const Mesh& mesh, int degree, int components, Restriction restriction);

  const Mesh& mesh() const { return *mesh_; }
  int degree() const { return degree_; }
  int components() const { return components_; }
  Restriction restriction() const { return restriction_; }

  std::size_t n_nodes() const { return node_points_.size(); }
  std::size_t n_dofs() const { return n_nodes() * static_cast<std::size_t>(components_); }
  std::size_t dof(std::size_t node, int comp) const {
    return node * static_cast<std::size_t>(components_) + static_cast<std::size_t>(comp);
  }

  /// Cells carrying the space (empty for interface spaces).
  const std::vector<std::size_t>& cells() const { return cells_; }
  /// Edges carrying an interface space.
  const std::vector<std::size_t>& facet_edges() const { return facet_edges_; }

  int nodes_per_cell() const { return n_local_nodes(degree_); }
  /// Local-to-global node map of an active cell.
  std::span<const std::size_t> cell_nodes(std::size_t cell) const;
  bool active(std::size_t cell) const { return cell_nodes_[cell * 6] != npos; }

  std::size_t node_of_vertex(std::size_t v) const { return vertex_node_[v]; }
  std::size_t node_of_edge(std::size_t e) const { return edge_node_.empty() ? npos : edge_node_[e]; }
  /// Nodes of edge e in segment_basis order; npos if e is not covered.
  std::array<std::size_t, 3> edge_nodes(std::size_t e) const;

  const Point& node_point(std::size_t node) const { return node_points_[node]; }

  /// Sorted nodes lying on facets with the given tag.
  std::vector<std::size_t> boundary_nodes(BoundaryTag tag) const;

  /// Cell on the space's side of edge e, with the local edge index; npos if none.
  std::pair<std::size_t, int> side_of_edge(std::size_t e) const;

 private:
  const Mesh* mesh_;
  int degree_;
  int components_;
  Restriction restriction_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> facet_edges_;
  std::vector<std::size_t> cell_nodes_;
  std::vector<std::size_t> vertex_node_;
  std::vector<std::size_t> edge_node_;
  std::vector<Point> node_points_;
};

bool cell_in(const Mesh& mesh, std::size_t cell, Restriction r);

/// Nodal interpolation of f; f writes `components` values.
Vector interpolate(const FeSpace& space, const std::function<void(const Point&, double*)>& f);

/// Value of component `comp` of the field at p. Throws NotFound outside the space's cells.
double evaluate_field(const FeSpace& space, const PointLocator& locator, const Vector& coeffs,
                      const Point& p, int comp = 0);
/// Physical gradient of component `comp` at p.
std::array<double, 2> evaluate_gradient(const FeSpace& space, const PointLocator& locator,
                                        const Vector& coeffs, const Point& p, int comp = 0);

/// L2 and H1 errors of a discrete field against an analytic one.
struct FieldError {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1() const;
};
FieldError field_error(const FeSpace& space, const Vector& coeffs,
                       const std::function<void(const Point&, double*, double (*)[2])>& exact,
                       int quad_order = 6);

}  // namespace coanda

namespace coanda {

/// Node permutation of the reflection y -> ymin + ymax - y. Throws
/// InvalidGeometry when the space's node set is not mirror-closed.
std::vector<std::size_t> mirror_nodes(const FeSpace& space, double tol = 1e-10);

/// Reflected field: values move to mirror nodes; for vector spaces the
/// y-component changes sign.
Vector reflect_field(const FeSpace& space, const std::vector<std::size_t>& mirror, const Vector& coeffs);

}  // namespace coanda
