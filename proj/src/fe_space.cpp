#include "coanda/fe_space.hpp"

#include <algorithm>
#include <cmath>

#include "coanda/error.hpp"
#include "coanda/quadrature.hpp"

namespace coanda {

const char* to_string(Restriction r) {
  switch (r) {
    case Restriction::All: return "all";
    case Restriction::Fluid: return "fluid";
    case Restriction::Solid: return "solid";
    case Restriction::Interface: return "interface";
  }
  return "unknown";
}

int n_local_nodes(int degree) { return degree == 1 ? 3 : 6; }

void reference_basis(int degree, const std::array<double, 3>& l, double* v, double (*g)[2]) {
  // dl/dxi = (-1, 1, 0), dl/deta = (-1, 0, 1)
  static constexpr double dl[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  if (degree == 1) {
    for (int i = 0; i < 3; ++i) {
      if (v) v[i] = l[i];
      if (g) {
        g[i][0] = dl[i][0];
        g[i][1] = dl[i][1];
      }
    }
    return;
  }
  for (int i = 0; i < 3; ++i) {
    if (v) v[i] = l[i] * (2.0 * l[i] - 1.0);
    if (g) {
      const double s = 4.0 * l[i] - 1.0;
      g[i][0] = s * dl[i][0];
      g[i][1] = s * dl[i][1];
    }
  }
  for (int k = 0; k < 3; ++k) {
    const int a = k;
    const int b = (k + 1) % 3;
    if (v) v[3 + k] = 4.0 * l[a] * l[b];
    if (g) {
      g[3 + k][0] = 4.0 * (dl[a][0] * l[b] + l[a] * dl[b][0]);
      g[3 + k][1] = 4.0 * (dl[a][1] * l[b] + l[a] * dl[b][1]);
    }
  }
}

void segment_basis(int degree, double t, double* v) {
  if (degree == 1) {
    v[0] = 1.0 - t;
    v[1] = t;
    return;
  }
  v[0] = (1.0 - t) * (1.0 - 2.0 * t);
  v[1] = t * (2.0 * t - 1.0);
  v[2] = 4.0 * t * (1.0 - t);
}

CellMap::CellMap(const Mesh& mesh, std::size_t cell) {
  const auto& t = mesh.cell(cell);
  const Point& p0 = mesh.vertex(t[0]);
  const Point& p1 = mesh.vertex(t[1]);
  const Point& p2 = mesh.vertex(t[2]);
  origin = p0;
  a << p1.x - p0.x, p2.x - p0.x, p1.y - p0.y, p2.y - p0.y;
  det = a.determinant();
  inv_t = a.inverse().transpose();
}

Point CellMap::map(const std::array<double, 3>& l) const {
  return {origin.x + a(0, 0) * l[1] + a(0, 1) * l[2], origin.y + a(1, 0) * l[1] + a(1, 1) * l[2]};
}

bool cell_in(const Mesh& mesh, std::size_t cell, Restriction r) {
  switch (r) {
    case Restriction::All: return true;
    case Restriction::Fluid: return mesh.cell_tag(cell) == CellTag::Fluid;
    case Restriction::Solid: return mesh.cell_tag(cell) == CellTag::Solid;
    case Restriction::Interface: return false;
  }
  return false;
}

FeSpace::FeSpace(const Mesh& mesh, int degree, int components, Restriction restriction)
    : mesh_(&mesh), degree_(degree), components_(components), restriction_(restriction) {
  if (degree != 1 && degree != 2) throw Error("FeSpace: degree must be 1 or 2");
  if (components != 1 && components != 2) throw Error("FeSpace: components must be 1 or 2");
  cell_nodes_.assign(mesh.n_cells() * 6, npos);
  vertex_node_.assign(mesh.n_vertices(), npos);
  if (degree == 2) edge_node_.assign(mesh.n_edges(), npos);

  std::vector<char> vertex_used(mesh.n_vertices(), 0);
  std::vector<char> edge_used(mesh.n_edges(), 0);
  if (restriction == Restriction::Interface) {
    for (const auto& f : mesh.facets()) {
      if (f.tag != BoundaryTag::FsiInterface) continue;
      facet_edges_.push_back(f.edge);
      edge_used[f.edge] = 1;
      vertex_used[mesh.edge(f.edge)[0]] = 1;
      vertex_used[mesh.edge(f.edge)[1]] = 1;
    }
    std::sort(facet_edges_.begin(), facet_edges_.end());
    if (facet_edges_.empty()) throw Error("FeSpace: the mesh has no FSI interface facets");
  } else {
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
      if (!cell_in(mesh, c, restriction)) continue;
      cells_.push_back(c);
      for (auto v : mesh.cell(c)) vertex_used[v] = 1;
      for (auto e : mesh.cell_edges(c)) edge_used[e] = 1;
    }
    if (cells_.empty()) throw Error(std::string("FeSpace: empty restriction '") + to_string(restriction) + "'");
  }

  for (std::size_t v = 0; v < mesh.n_vertices(); ++v) {
    if (!vertex_used[v]) continue;
    vertex_node_[v] = node_points_.size();
    node_points_.push_back(mesh.vertex(v));
  }
  if (degree == 2) {
    for (std::size_t e = 0; e < mesh.n_edges(); ++e) {
      if (!edge_used[e]) continue;
      edge_node_[e] = node_points_.size();
      node_points_.push_back(mesh.midpoint(e));
    }
  }
  for (auto c : cells_) {
    std::size_t* nodes = &cell_nodes_[c * 6];
    for (int k = 0; k < 3; ++k) nodes[k] = vertex_node_[mesh.cell(c)[k]];
    if (degree == 2)
      for (int k = 0; k < 3; ++k) nodes[3 + k] = edge_node_[mesh.cell_edges(c)[k]];
  }
}

std::span<const std::size_t> FeSpace::cell_nodes(std::size_t cell) const {
  return {&cell_nodes_[cell * 6], static_cast<std::size_t>(nodes_per_cell())};
}

std::array<std::size_t, 3> FeSpace::edge_nodes(std::size_t e) const {
  const auto& ed = mesh_->edge(e);
  return {vertex_node_[ed[0]], vertex_node_[ed[1]], degree_ == 2 ? edge_node_[e] : npos};
}

std::vector<std::size_t> FeSpace::boundary_nodes(BoundaryTag tag) const {
  std::vector<std::size_t> out;
  for (const auto& f : mesh_->facets()) {
    if (f.tag != tag) continue;
    for (auto n : edge_nodes(f.edge))
      if (n != npos) out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::pair<std::size_t, int> FeSpace::side_of_edge(std::size_t e) const {
  for (auto c : mesh_->edge_cells(e)) {
    if (c == npos) continue;
    if (restriction_ != Restriction::Interface && !active(c)) continue;
    const auto& ce = mesh_->cell_edges(c);
    for (int k = 0; k < 3; ++k)
      if (ce[k] == e) return {c, k};
  }
  return {npos, -1};
}

Vector interpolate(const FeSpace& space, const std::function<void(const Point&, double*)>& f) {
  Vector x(static_cast<Eigen::Index>(space.n_dofs()));
  double buf[2] = {0.0, 0.0};
  for (std::size_t n = 0; n < space.n_nodes(); ++n) {
    f(space.node_point(n), buf);
    for (int c = 0; c < space.components(); ++c) x[static_cast<Eigen::Index>(space.dof(n, c))] = buf[c];
  }
  return x;
}

namespace {

Location locate_in(const FeSpace& space, const PointLocator& locator, const Point& p) {
  if (&locator.mesh() != &space.mesh()) throw Error("point locator built on a different mesh");
  switch (space.restriction()) {
    case Restriction::Fluid: return locator.locate(p, CellTag::Fluid);
    case Restriction::Solid: return locator.locate(p, CellTag::Solid);
    case Restriction::All: return locator.locate(p);
    case Restriction::Interface: break;
  }
  throw Error("point evaluation is not available on interface spaces");
}

}  // namespace

double evaluate_field(const FeSpace& space, const PointLocator& locator, const Vector& coeffs,
                      const Point& p, int comp) {
  const Location loc = locate_in(space, locator, p);
  double v[6];
  reference_basis(space.degree(), loc.bary, v, nullptr);
  const auto nodes = space.cell_nodes(loc.cell);
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    s += coeffs[static_cast<Eigen::Index>(space.dof(nodes[i], comp))] * v[i];
  return s;
}

std::array<double, 2> evaluate_gradient(const FeSpace& space, const PointLocator& locator,
                                        const Vector& coeffs, const Point& p, int comp) {
  const Location loc = locate_in(space, locator, p);
  double g[6][2];
  reference_basis(space.degree(), loc.bary, nullptr, g);
  const CellMap map(space.mesh(), loc.cell);
  const auto nodes = space.cell_nodes(loc.cell);
  Eigen::Vector2d ref = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double c = coeffs[static_cast<Eigen::Index>(space.dof(nodes[i], comp))];
    ref += c * Eigen::Vector2d(g[i][0], g[i][1]);
  }
  const Eigen::Vector2d phys = map.inv_t * ref;
  return {phys[0], phys[1]};
}

double FieldError::h1() const { return std::sqrt(l2 * l2 + h1_semi * h1_semi); }

FieldError field_error(const FeSpace& space, const Vector& coeffs,
                       const std::function<void(const Point&, double*, double (*)[2])>& exact,
                       int quad_order) {
  const auto& rule = triangle_rule(quad_order);
  const int nc = space.components();
  const int nl = space.nodes_per_cell();
  double l2 = 0.0;
  double h1 = 0.0;
  for (auto c : space.cells()) {
    const CellMap map(space.mesh(), c);
    const auto nodes = space.cell_nodes(c);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double v[6];
      double g[6][2];
      reference_basis(space.degree(), rule.points[q], v, g);
      double ev[2] = {0.0, 0.0};
      double eg[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      exact(map.map(rule.points[q]), ev, eg);
      const double w = rule.weights[q] * std::abs(map.det);
      for (int k = 0; k < nc; ++k) {
        double uh = 0.0;
        Eigen::Vector2d gr = Eigen::Vector2d::Zero();
        for (int i = 0; i < nl; ++i) {
          const double ci = coeffs[static_cast<Eigen::Index>(space.dof(nodes[i], k))];
          uh += ci * v[i];
          gr += ci * Eigen::Vector2d(g[i][0], g[i][1]);
        }
        const Eigen::Vector2d gp = map.inv_t * gr;
        l2 += w * (uh - ev[k]) * (uh - ev[k]);
        h1 += w * ((gp[0] - eg[k][0]) * (gp[0] - eg[k][0]) + (gp[1] - eg[k][1]) * (gp[1] - eg[k][1]));
      }
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

}  // namespace coanda

namespace coanda {

std::vector<std::size_t> mirror_nodes(const FeSpace& space, double tol) {
  const double s = space.mesh().ymin() + space.mesh().ymax();
  const std::size_t n = space.n_nodes();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point& pa = space.node_point(a);
    const Point& pb = space.node_point(b);
    return pa.x != pb.x ? pa.x < pb.x : pa.y < pb.y;
  });
  std::vector<std::size_t> mirror(n, npos);
  for (std::size_t i = 0; i < n; ++i) {
    const Point q{space.node_point(i).x, s - space.node_point(i).y};
    auto it = std::lower_bound(order.begin(), order.end(), q.x - tol,
                               [&](std::size_t a, double x) { return space.node_point(a).x < x; });
    for (; it != order.end() && space.node_point(*it).x <= q.x + tol; ++it) {
      if (std::abs(space.node_point(*it).y - q.y) <= tol) {
        mirror[i] = *it;
        break;
      }
    }
    if (mirror[i] == npos) throw InvalidGeometry("space is not mirror-symmetric about the channel midline");
  }
  return mirror;
}

Vector reflect_field(const FeSpace& space, const std::vector<std::size_t>& mirror, const Vector& coeffs) {
  Vector out(coeffs.size());
  const int nc = space.components();
  for (std::size_t i = 0; i < mirror.size(); ++i) {
    for (int c = 0; c < nc; ++c) {
      const double sign = (nc == 2 && c == 1) ? -1.0 : 1.0;
      out[static_cast<Eigen::Index>(space.dof(mirror[i], c))] = sign * coeffs[static_cast<Eigen::Index>(space.dof(i, c))];
    }
  }
  return out;
}

}  // namespace coanda
