#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace coanda {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Reference channel with a contraction formed by two leaflets (all lengths in cm).
///
/// Upper leaflet: [leaflet_upstream_x, expansion_x] x [throat_hi, height].
/// Lower leaflet: [leaflet_upstream_x, expansion_x] x [0, throat_lo].
struct ChannelGeometry {
  double length = 50.0;
  double height = 7.5;
  double throat_lo = 2.5;
  double throat_hi = 5.0;
  double expansion_x = 6.0;
  double leaflet_thickness = 1.0;
  double leaflet_upstream_x = 5.0;

  /// Throws InvalidGeometry when the leaflet rectangles are degenerate or
  /// do not fit inside the channel.
  void validate() const;

  double throat_width() const { return throat_hi - throat_lo; }
};

enum class MeshVariant {
  Rigid,     ///< leaflets are holes in the fluid domain
  Fsi,       ///< leaflets are meshed and tagged solid
  Straight,  ///< leaflet-free rectangle [0,length] x [0,height]
};

enum class BoundaryTag : int {
  Inlet = 1,
  Outlet = 2,
  Wall = 3,
  FsiInterface = 4,
  SolidDirichlet = 5,
};

enum class CellTag : int {
  Fluid = 1,
  Solid = 2,
};

const char* to_string(BoundaryTag tag);
const char* to_string(MeshVariant variant);
MeshVariant parse_mesh_variant(const std::string& name);

struct FacetSpec {
  std::size_t v0 = 0;
  std::size_t v1 = 0;
  BoundaryTag tag = BoundaryTag::Wall;
};

/// Tagged facet resolved against the mesh edge table.
struct Facet {
  std::size_t edge = 0;
  BoundaryTag tag = BoundaryTag::Wall;
};

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Conforming triangulation of the reference configuration.
///
/// Cells are stored counter-clockwise. The local edge k of a cell joins its
/// local vertices k and (k+1)%3. The mesh never moves: deformations live in
/// the displacement fields.
class Mesh {
 public:
  Mesh() = default;
  /// Builds the edge tables and checks orientation, conformity and facet tags.
  /// Clockwise cells are reoriented.
  Mesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> cells,
       std::vector<CellTag> cell_tags, const std::vector<FacetSpec>& facets);

  std::size_t n_vertices() const { return vertices_.size(); }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t n_edges() const { return edges_.size(); }

  const Point& vertex(std::size_t v) const { return vertices_[v]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::array<std::size_t, 3>& cell(std::size_t c) const { return cells_[c]; }
  const std::vector<std::array<std::size_t, 3>>& cells() const { return cells_; }
  CellTag cell_tag(std::size_t c) const { return cell_tags_[c]; }
  const std::array<std::size_t, 3>& cell_edges(std::size_t c) const { return cell_edges_[c]; }
  const std::array<std::size_t, 2>& edge(std::size_t e) const { return edges_[e]; }
  /// Cells adjacent to edge e; the second entry is npos for boundary edges.
  const std::array<std::size_t, 2>& edge_cells(std::size_t e) const { return edge_cells_[e]; }

  const std::vector<Facet>& facets() const { return facets_; }
  /// Index into facets() for edge e, or npos.
  std::size_t facet_of_edge(std::size_t e) const { return facet_of_edge_[e]; }

  double cell_area(std::size_t c) const;
  Point centroid(std::size_t c) const;
  Point midpoint(std::size_t e) const;
  double edge_length(std::size_t e) const;

  /// Outward unit normal of facet f with respect to `side` cell (one of edge_cells).
  Point facet_normal(std::size_t edge, std::size_t side_cell) const;

  double xmin() const { return bbox_[0]; }
  double xmax() const { return bbox_[1]; }
  double ymin() const { return bbox_[2]; }
  double ymax() const { return bbox_[3]; }

  bool has_solid() const;

  /// True when vertices, cells and cell tags are closed under y -> ymin+ymax-y.
  bool is_mirror_symmetric(double tol = 1e-12) const;

 private:
  void build_edges();
  void attach_facets(const std::vector<FacetSpec>& facets);

  std::vector<Point> vertices_;
  std::vector<std::array<std::size_t, 3>> cells_;
  std::vector<CellTag> cell_tags_;
  std::vector<std::array<std::size_t, 2>> edges_;
  std::vector<std::array<std::size_t, 3>> cell_edges_;
  std::vector<std::array<std::size_t, 2>> edge_cells_;
  std::vector<Facet> facets_;
  std::vector<std::size_t> facet_of_edge_;
  std::array<double, 4> bbox_{0.0, 0.0, 0.0, 0.0};
};

/// Block-structured triangulation of the channel outline with target edge
/// length `h_target`. With `symmetric` set, the mesh is an exact mirror image
/// of itself about y = height/2.
Mesh build_channel_mesh(const ChannelGeometry& geom, double h_target, MeshVariant variant,
                        bool symmetric);

/// Result of a point query.
struct Location {
  std::size_t cell = 0;
  std::array<double, 3> bary{1.0, 0.0, 0.0};
};

/// Bucket grid over the mesh bounding box for point location.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);

  /// Finds a cell containing p. Throws NotFound outside the meshed region.
  Location locate(const Point& p) const;
  /// As locate(), restricted to cells with the given tag.
  Location locate(const Point& p, CellTag tag) const;

  const Mesh& mesh() const { return *mesh_; }

 private:
  template <class Pred>
  bool search(const Point& p, Pred&& accept, Location& out) const;

  const Mesh* mesh_;
  std::size_t nx_ = 1;
  std::size_t ny_ = 1;
  double dx_ = 1.0;
  double dy_ = 1.0;
  std::vector<std::vector<std::size_t>> buckets_;
};

/// Barycentric coordinates of p in cell c (unclamped).
std::array<double, 3> barycentric(const Mesh& mesh, std::size_t c, const Point& p);

}  // namespace coanda
