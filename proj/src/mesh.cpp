#include "coanda/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "coanda/error.hpp"

namespace coanda {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

struct Interval {
  double lo;
  double hi;
  std::size_t n;
};

std::size_t n_divisions(double len, double h) {
  const auto n = static_cast<long>(std::lround(len / h));
  return static_cast<std::size_t>(std::max(1L, n));
}

// Grid coordinates from consecutive intervals; the last coordinate of an
// interval equals the first of the next one.
std::vector<double> grid_coordinates(const std::vector<Interval>& intervals) {
  std::vector<double> coords{intervals.front().lo};
  for (const auto& iv : intervals) {
    for (std::size_t k = 1; k <= iv.n; ++k) {
      coords.push_back(k == iv.n ? iv.hi
                                 : iv.lo + (iv.hi - iv.lo) * static_cast<double>(k) /
                                               static_cast<double>(iv.n));
    }
  }
  return coords;
}

}  // namespace

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Inlet: return "inlet";
    case BoundaryTag::Outlet: return "outlet";
    case BoundaryTag::Wall: return "wall";
    case BoundaryTag::FsiInterface: return "fsi_interface";
    case BoundaryTag::SolidDirichlet: return "solid_dirichlet";
  }
  return "unknown";
}

const char* to_string(MeshVariant variant) {
  switch (variant) {
    case MeshVariant::Rigid: return "rigid";
    case MeshVariant::Fsi: return "fsi";
    case MeshVariant::Straight: return "straight";
  }
  return "unknown";
}

MeshVariant parse_mesh_variant(const std::string& name) {
  if (name == "rigid") return MeshVariant::Rigid;
  if (name == "fsi") return MeshVariant::Fsi;
  if (name == "straight") return MeshVariant::Straight;
  throw ConfigError("unknown mesh variant '" + name + "'");
}

void ChannelGeometry::validate() const {
  std::ostringstream why;
  if (!(length > 0.0 && height > 0.0)) why << "channel must have positive extent; ";
  if (!(0.0 < throat_lo && throat_lo < throat_hi && throat_hi < height))
    why << "need 0 < throat_lo < throat_hi < height; ";
  if (!(0.0 < leaflet_upstream_x && leaflet_upstream_x < expansion_x && expansion_x < length))
    why << "need 0 < leaflet_upstream_x < expansion_x < length; ";
  if (!(leaflet_thickness > 0.0) ||
      std::abs(expansion_x - leaflet_upstream_x - leaflet_thickness) > 1e-12 * length)
    why << "leaflet_thickness must equal expansion_x - leaflet_upstream_x > 0; ";
  const auto msg = why.str();
  if (!msg.empty()) throw InvalidGeometry("invalid channel geometry: " + msg);
}

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<std::size_t, 3>> cells,
           std::vector<CellTag> cell_tags, const std::vector<FacetSpec>& facets)
    : vertices_(std::move(vertices)), cells_(std::move(cells)), cell_tags_(std::move(cell_tags)) {
  if (cells_.empty()) throw InvalidGeometry("mesh has no cells");
  if (cell_tags_.size() != cells_.size())
    throw InvalidGeometry("cell tag count does not match cell count");
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    auto& t = cells_[c];
    for (auto v : t)
      if (v >= vertices_.size()) throw InvalidGeometry("cell references a missing vertex");
    const double a = signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
    if (a == 0.0) throw InvalidGeometry("degenerate cell " + std::to_string(c));
    if (a < 0.0) std::swap(t[1], t[2]);
  }
  bbox_ = {vertices_[0].x, vertices_[0].x, vertices_[0].y, vertices_[0].y};
  for (const auto& p : vertices_) {
    bbox_[0] = std::min(bbox_[0], p.x);
    bbox_[1] = std::max(bbox_[1], p.x);
    bbox_[2] = std::min(bbox_[2], p.y);
    bbox_[3] = std::max(bbox_[3], p.y);
  }
  build_edges();
  attach_facets(facets);
}

void Mesh::build_edges() {
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency(vertices_.size());
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      std::size_t a = cells_[c][k];
      std::size_t b = cells_[c][(k + 1) % 3];
      if (a > b) std::swap(a, b);
      auto& adj = adjacency[a];
      auto it = std::find_if(adj.begin(), adj.end(), [b](const auto& e) { return e.first == b; });
      std::size_t e;
      if (it == adj.end()) {
        e = edges_.size();
        edges_.push_back({a, b});
        edge_cells_.push_back({c, npos});
        adj.emplace_back(b, e);
      } else {
        e = it->second;
        if (edge_cells_[e][1] != npos)
          throw InvalidGeometry("non-conforming mesh: edge shared by more than two cells");
        edge_cells_[e][1] = c;
      }
      cell_edges_[c][k] = e;
    }
  }
}

void Mesh::attach_facets(const std::vector<FacetSpec>& facets) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> lookup;
  for (std::size_t e = 0; e < edges_.size(); ++e) lookup[{edges_[e][0], edges_[e][1]}] = e;
  facet_of_edge_.assign(edges_.size(), npos);
  for (const auto& f : facets) {
    auto key = std::minmax(f.v0, f.v1);
    auto it = lookup.find({key.first, key.second});
    if (it == lookup.end()) throw InvalidGeometry("facet does not match a mesh edge");
    const std::size_t e = it->second;
    if (facet_of_edge_[e] != npos) throw InvalidGeometry("edge carries more than one facet tag");
    facet_of_edge_[e] = facets_.size();
    facets_.push_back({e, f.tag});
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& ec = edge_cells_[e];
    const bool boundary = ec[1] == npos;
    const bool interface = !boundary && cell_tags_[ec[0]] != cell_tags_[ec[1]];
    if (interface && facet_of_edge_[e] == npos) {
      facet_of_edge_[e] = facets_.size();
      facets_.push_back({e, BoundaryTag::FsiInterface});
    }
    if (boundary && facet_of_edge_[e] == npos)
      throw InvalidGeometry("boundary edge " + std::to_string(e) + " has no tag");
    if (!boundary && !interface && facet_of_edge_[e] != npos)
      throw InvalidGeometry("interior edge " + std::to_string(e) + " carries a boundary tag");
    if (interface && facets_[facet_of_edge_[e]].tag != BoundaryTag::FsiInterface)
      throw InvalidGeometry("fluid/solid edge must be tagged as the FSI interface");
  }
}

double Mesh::cell_area(std::size_t c) const {
  const auto& t = cells_[c];
  return signed_area(vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
}

Point Mesh::centroid(std::size_t c) const {
  const auto& t = cells_[c];
  return {(vertices_[t[0]].x + vertices_[t[1]].x + vertices_[t[2]].x) / 3.0,
          (vertices_[t[0]].y + vertices_[t[1]].y + vertices_[t[2]].y) / 3.0};
}

Point Mesh::midpoint(std::size_t e) const {
  const auto& a = vertices_[edges_[e][0]];
  const auto& b = vertices_[edges_[e][1]];
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

double Mesh::edge_length(std::size_t e) const {
  const auto& a = vertices_[edges_[e][0]];
  const auto& b = vertices_[edges_[e][1]];
  return std::hypot(b.x - a.x, b.y - a.y);
}

Point Mesh::facet_normal(std::size_t e, std::size_t side_cell) const {
  const auto& a = vertices_[edges_[e][0]];
  const auto& b = vertices_[edges_[e][1]];
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  Point n{(b.y - a.y) / len, -(b.x - a.x) / len};
  const Point c = centroid(side_cell);
  if ((c.x - a.x) * n.x + (c.y - a.y) * n.y > 0.0) {
    n.x = -n.x;
    n.y = -n.y;
  }
  return n;
}

bool Mesh::has_solid() const {
  return std::any_of(cell_tags_.begin(), cell_tags_.end(),
                     [](CellTag t) { return t == CellTag::Solid; });
}

bool Mesh::is_mirror_symmetric(double tol) const {
  const double s = ymin() + ymax();
  std::vector<std::size_t> order(vertices_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return vertices_[a].x != vertices_[b].x ? vertices_[a].x < vertices_[b].x
                                            : vertices_[a].y < vertices_[b].y;
  });
  std::vector<std::size_t> mirror(vertices_.size(), npos);
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const Point q{vertices_[v].x, s - vertices_[v].y};
    auto it = std::lower_bound(order.begin(), order.end(), q.x - tol,
                               [this](std::size_t a, double x) { return vertices_[a].x < x; });
    for (; it != order.end() && vertices_[*it].x <= q.x + tol; ++it) {
      if (std::abs(vertices_[*it].y - q.y) <= tol) {
        mirror[v] = *it;
        break;
      }
    }
    if (mirror[v] == npos) return false;
  }
  std::map<std::array<std::size_t, 3>, CellTag> cells;
  auto sorted = [](std::array<std::size_t, 3> t) {
    std::sort(t.begin(), t.end());
    return t;
  };
  for (std::size_t c = 0; c < cells_.size(); ++c) cells[sorted(cells_[c])] = cell_tags_[c];
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    const auto& t = cells_[c];
    auto it = cells.find(sorted({mirror[t[0]], mirror[t[1]], mirror[t[2]]}));
    if (it == cells.end() || it->second != cell_tags_[c]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Generator

Mesh build_channel_mesh(const ChannelGeometry& geom, double h, MeshVariant variant,
                        bool symmetric) {
  if (!(h > 0.0)) throw InvalidGeometry("h_target must be positive");
  const bool leaflets = variant != MeshVariant::Straight;
  const double H = geom.height;
  const double L = geom.length;
  const double mid = 0.5 * H;
  if (leaflets) {
    geom.validate();
    if (symmetric && std::abs((H - geom.throat_hi) - geom.throat_lo) > 1e-12 * H)
      throw InvalidGeometry("symmetric mesh requested for an asymmetric throat");
  } else if (!(L > 0.0 && H > 0.0)) {
    throw InvalidGeometry("channel must have positive extent");
  }

  std::vector<Interval> xs;
  std::vector<Interval> ys;
  if (leaflets) {
    xs = {{0.0, geom.leaflet_upstream_x, 0},
          {geom.leaflet_upstream_x, geom.expansion_x, 0},
          {geom.expansion_x, L, 0}};
    if (symmetric)
      ys = {{0.0, geom.throat_lo, 0}, {geom.throat_lo, mid, 0}};
    else
      ys = {{0.0, geom.throat_lo, 0}, {geom.throat_lo, geom.throat_hi, 0}, {geom.throat_hi, H, 0}};
  } else {
    xs = {{0.0, L, 0}};
    ys = symmetric ? std::vector<Interval>{{0.0, mid, 0}} : std::vector<Interval>{{0.0, H, 0}};
  }
  for (auto& iv : xs) iv.n = n_divisions(iv.hi - iv.lo, h);
  for (auto& iv : ys) iv.n = n_divisions(iv.hi - iv.lo, h);

  if (leaflets) {
    const double throat = geom.throat_width();
    const auto layers = symmetric ? 2 * static_cast<std::size_t>(std::lround(0.5 * throat / h))
                                  : static_cast<std::size_t>(std::lround(throat / h));
    if (layers < 2)
      throw InvalidGeometry("h_target = " + std::to_string(h) +
                            " leaves fewer than 2 cell layers across the throat");
    if (symmetric) ys[1].n = layers / 2;
    else ys[1].n = layers;
  }

  const std::vector<double> xc = grid_coordinates(xs);
  std::vector<double> yc = grid_coordinates(ys);
  if (symmetric) {
    // Upper half as exact mirror images of the lower half.
    const std::size_t n_lower = yc.size();
    for (std::size_t k = n_lower - 1; k-- > 0;) yc.push_back(H - yc[k]);
    yc[n_lower - 1] = mid;
  }
  const std::size_t nx = xc.size() - 1;
  const std::size_t ny = yc.size() - 1;

  // Rectangle classification: 0 = outside, 1 = fluid, 2 = solid.
  auto in_leaflet = [&](double x, double y) {
    if (!leaflets) return false;
    const bool in_x = x > geom.leaflet_upstream_x && x < geom.expansion_x;
    return in_x && (y < geom.throat_lo || y > geom.throat_hi);
  };
  std::vector<int> region(nx * ny, 0);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double cx = 0.5 * (xc[i] + xc[i + 1]);
      const double cy = 0.5 * (yc[j] + yc[j + 1]);
      const bool solid = in_leaflet(cx, cy);
      region[j * nx + i] = solid ? (variant == MeshVariant::Fsi ? 2 : 0) : 1;
    }
  }
  // Region used to decide which rectangle sides are boundaries. The fluid
  // part sees the leaflets as holes in both the rigid and the FSI variant so
  // that the two meshes coincide on the fluid cells.
  auto kind = [&](long i, long j) -> int {
    if (i < 0 || j < 0 || i >= static_cast<long>(nx) || j >= static_cast<long>(ny)) return 0;
    const double cx = 0.5 * (xc[i] + xc[i + 1]);
    const double cy = 0.5 * (yc[j] + yc[j + 1]);
    return in_leaflet(cx, cy) ? 2 : 1;
  };

  std::vector<std::size_t> vid((nx + 1) * (ny + 1), npos);
  std::vector<Point> vertices;
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      bool used = false;
      for (long dj = -1; dj <= 0 && !used; ++dj) {
        for (long di = -1; di <= 0 && !used; ++di) {
          const long ii = static_cast<long>(i) + di;
          const long jj = static_cast<long>(j) + dj;
          if (ii >= 0 && jj >= 0 && ii < static_cast<long>(nx) && jj < static_cast<long>(ny))
            used = region[jj * nx + ii] != 0;
        }
      }
      if (used) {
        vid[j * (nx + 1) + i] = vertices.size();
        vertices.push_back({xc[i], yc[j]});
      }
    }
  }

  std::vector<std::array<std::size_t, 3>> cells;
  std::vector<CellTag> tags;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const int r = region[j * nx + i];
      if (r == 0) continue;
      const long li = static_cast<long>(i);
      const long lj = static_cast<long>(j);
      const int k = kind(li, lj);
      const bool bottom = kind(li, lj - 1) != k;
      const bool top = kind(li, lj + 1) != k;
      const bool left = kind(li - 1, lj) != k;
      const bool right = kind(li + 1, lj) != k;
      const bool upper_half = symmetric && 0.5 * (yc[j] + yc[j + 1]) > mid;
      // "/" joins bottom-left and top-right; "\" the other two corners.
      bool slash = !upper_half;
      auto bad = [&](bool s) {
        return s ? ((bottom && right) || (top && left)) : ((bottom && left) || (top && right));
      };
      if (bad(slash) && !bad(!slash)) slash = !slash;
      const std::size_t a = vid[j * (nx + 1) + i];
      const std::size_t b = vid[j * (nx + 1) + i + 1];
      const std::size_t c = vid[(j + 1) * (nx + 1) + i + 1];
      const std::size_t d = vid[(j + 1) * (nx + 1) + i];
      const CellTag tag = r == 2 ? CellTag::Solid : CellTag::Fluid;
      if (slash) {
        cells.push_back({a, b, c});
        cells.push_back({a, c, d});
      } else {
        cells.push_back({a, b, d});
        cells.push_back({b, c, d});
      }
      tags.push_back(tag);
      tags.push_back(tag);
    }
  }

  // Facet tags from a temporary untagged edge scan.
  std::map<std::pair<std::size_t, std::size_t>, std::pair<int, int>> edge_use;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(cells[c][k], cells[c][(k + 1) % 3]);
      auto& use = edge_use[{key.first, key.second}];
      const int t = static_cast<int>(tags[c]);
      if (use.first == 0) use.first = t;
      else use.second = t;
    }
  }
  const double tol = 1e-9 * std::max(L, H);
  std::vector<FacetSpec> facets;
  for (const auto& [key, use] : edge_use) {
    const Point& p = vertices[key.first];
    const Point& q = vertices[key.second];
    if (use.second != 0) {
      if (use.first != use.second)
        facets.push_back({key.first, key.second, BoundaryTag::FsiInterface});
      continue;
    }
    BoundaryTag tag;
    if (use.first == static_cast<int>(CellTag::Solid)) {
      const bool on_wall = (std::abs(p.y) < tol && std::abs(q.y) < tol) ||
                           (std::abs(p.y - H) < tol && std::abs(q.y - H) < tol);
      if (!on_wall) throw InvalidGeometry("solid boundary edge off the channel walls");
      tag = BoundaryTag::SolidDirichlet;
    } else if (std::abs(p.x) < tol && std::abs(q.x) < tol) {
      tag = BoundaryTag::Inlet;
    } else if (std::abs(p.x - L) < tol && std::abs(q.x - L) < tol) {
      tag = BoundaryTag::Outlet;
    } else {
      tag = BoundaryTag::Wall;
    }
    facets.push_back({key.first, key.second, tag});
  }
  return Mesh(std::move(vertices), std::move(cells), std::move(tags), facets);
}

// ---------------------------------------------------------------------------
// Point location

std::array<double, 3> barycentric(const Mesh& mesh, std::size_t c, const Point& p) {
  const auto& t = mesh.cell(c);
  const Point& a = mesh.vertex(t[0]);
  const Point& b = mesh.vertex(t[1]);
  const Point& d = mesh.vertex(t[2]);
  const double det = (b.x - a.x) * (d.y - a.y) - (d.x - a.x) * (b.y - a.y);
  const double l1 = ((p.x - a.x) * (d.y - a.y) - (d.x - a.x) * (p.y - a.y)) / det;
  const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
  return {1.0 - l1 - l2, l1, l2};
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  const double w = mesh.xmax() - mesh.xmin();
  const double hgt = mesh.ymax() - mesh.ymin();
  const double target = std::sqrt(std::max(w * hgt, 1e-300) / static_cast<double>(mesh.n_cells()));
  nx_ = std::max<std::size_t>(1, static_cast<std::size_t>(w / (2.0 * target)));
  ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(hgt / (2.0 * target)));
  dx_ = w / static_cast<double>(nx_);
  dy_ = hgt / static_cast<double>(ny_);
  buckets_.assign(nx_ * ny_, {});
  auto bx = [this, &mesh](double x) {
    const auto i = static_cast<long>(std::floor((x - mesh.xmin()) / dx_));
    return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(nx_) - 1));
  };
  auto by = [this, &mesh](double y) {
    const auto j = static_cast<long>(std::floor((y - mesh.ymin()) / dy_));
    return static_cast<std::size_t>(std::clamp(j, 0L, static_cast<long>(ny_) - 1));
  };
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cell(c);
    double x0 = mesh.vertex(t[0]).x, x1 = x0, y0 = mesh.vertex(t[0]).y, y1 = y0;
    for (int k = 1; k < 3; ++k) {
      x0 = std::min(x0, mesh.vertex(t[k]).x);
      x1 = std::max(x1, mesh.vertex(t[k]).x);
      y0 = std::min(y0, mesh.vertex(t[k]).y);
      y1 = std::max(y1, mesh.vertex(t[k]).y);
    }
    for (std::size_t j = by(y0); j <= by(y1); ++j)
      for (std::size_t i = bx(x0); i <= bx(x1); ++i) buckets_[j * nx_ + i].push_back(c);
  }
}

template <class Pred>
bool PointLocator::search(const Point& p, Pred&& accept, Location& out) const {
  const Mesh& mesh = *mesh_;
  const double slack = 1e-12 * std::max(dx_, dy_);
  if (p.x < mesh.xmin() - slack || p.x > mesh.xmax() + slack || p.y < mesh.ymin() - slack ||
      p.y > mesh.ymax() + slack)
    return false;
  const auto i = static_cast<std::size_t>(std::clamp(
      static_cast<long>(std::floor((p.x - mesh.xmin()) / dx_)), 0L, static_cast<long>(nx_) - 1));
  const auto j = static_cast<std::size_t>(std::clamp(
      static_cast<long>(std::floor((p.y - mesh.ymin()) / dy_)), 0L, static_cast<long>(ny_) - 1));
  constexpr double eps = 1e-12;
  for (std::size_t c : buckets_[j * nx_ + i]) {
    if (!accept(c)) continue;
    auto b = barycentric(mesh, c, p);
    if (b[0] >= -eps && b[1] >= -eps && b[2] >= -eps) {
      double s = 0.0;
      for (auto& v : b) {
        v = std::clamp(v, 0.0, 1.0);
        s += v;
      }
      for (auto& v : b) v /= s;
      out.cell = c;
      out.bary = b;
      return true;
    }
  }
  return false;
}

Location PointLocator::locate(const Point& p) const {
  Location loc;
  if (!search(p, [](std::size_t) { return true; }, loc))
    throw NotFound("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                   ") is outside the meshed domain");
  return loc;
}

Location PointLocator::locate(const Point& p, CellTag tag) const {
  Location loc;
  if (!search(p, [this, tag](std::size_t c) { return mesh_->cell_tag(c) == tag; }, loc))
    throw NotFound("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                   ") is outside the requested subdomain");
  return loc;
}

}  // namespace coanda
