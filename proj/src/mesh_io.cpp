#include "coanda/mesh_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "coanda/error.hpp"

namespace coanda {

namespace {

void expect_header(std::istream& in, const std::string& word, std::size_t& count) {
  std::string w;
  if (!(in >> w >> count) || w != word) throw IoError("mesh file: expected '" + word + " <count>'");
}

CellTag cell_tag_from(int t) {
  if (t == 1) return CellTag::Fluid;
  if (t == 2) return CellTag::Solid;
  throw IoError("mesh file: unknown cell tag " + std::to_string(t));
}

BoundaryTag boundary_tag_from(int t) {
  if (t >= 1 && t <= 5) return static_cast<BoundaryTag>(t);
  throw IoError("mesh file: unknown boundary tag " + std::to_string(t));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.n_vertices() << '\n';
  for (const auto& p : mesh.vertices()) out << fmt(p.x) << ' ' << fmt(p.y) << '\n';
  out << "cells " << mesh.n_cells() << '\n';
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto& t = mesh.cell(c);
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << static_cast<int>(mesh.cell_tag(c)) << '\n';
  }
  out << "facets " << mesh.facets().size() << '\n';
  for (const auto& f : mesh.facets()) {
    const auto& e = mesh.edge(f.edge);
    out << e[0] << ' ' << e[1] << ' ' << static_cast<int>(f.tag) << '\n';
  }
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_mesh(mesh, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

Mesh read_mesh(std::istream& in) {
  std::size_t n = 0;
  expect_header(in, "vertices", n);
  std::vector<Point> vertices(n);
  for (auto& p : vertices)
    if (!(in >> p.x >> p.y)) throw IoError("mesh file: truncated vertex list");
  expect_header(in, "cells", n);
  std::vector<std::array<std::size_t, 3>> cells(n);
  std::vector<CellTag> tags(n);
  for (std::size_t c = 0; c < n; ++c) {
    int t = 0;
    if (!(in >> cells[c][0] >> cells[c][1] >> cells[c][2] >> t)) throw IoError("mesh file: truncated cell list");
    tags[c] = cell_tag_from(t);
  }
  expect_header(in, "facets", n);
  std::vector<FacetSpec> facets(n);
  for (auto& f : facets) {
    int t = 0;
    if (!(in >> f.v0 >> f.v1 >> t)) throw IoError("mesh file: truncated facet list");
    f.tag = boundary_tag_from(t);
  }
  return Mesh(std::move(vertices), std::move(cells), std::move(tags), facets);
}

Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

Mesh read_gmsh(std::istream& in) {
  std::string line;
  std::map<long, std::size_t> node_index;
  std::vector<Point> vertices;
  std::vector<std::array<std::size_t, 3>> cells;
  std::vector<CellTag> tags;
  std::vector<FacetSpec> facets;
  bool have_format = false;
  auto node = [&](long id) {
    auto it = node_index.find(id);
    if (it == node_index.end()) throw IoError("gmsh: element references unknown node " + std::to_string(id));
    return it->second;
  };
  while (std::getline(in, line)) {
    if (line.rfind("$MeshFormat", 0) == 0) {
      double version = 0.0;
      int file_type = 0;
      int dsize = 0;
      if (!(in >> version >> file_type >> dsize)) throw IoError("gmsh: bad $MeshFormat");
      if (version < 2.0 || version >= 3.0) throw IoError("gmsh: only MSH 2.x is supported");
      if (file_type != 0) throw IoError("gmsh: only ASCII files are supported");
      have_format = true;
    } else if (line.rfind("$Nodes", 0) == 0) {
      std::size_t n = 0;
      in >> n;
      for (std::size_t i = 0; i < n; ++i) {
        long id = 0;
        double x = 0.0, y = 0.0, z = 0.0;
        if (!(in >> id >> x >> y >> z)) throw IoError("gmsh: truncated $Nodes");
        node_index[id] = vertices.size();
        vertices.push_back({x, y});
      }
    } else if (line.rfind("$Elements", 0) == 0) {
      std::size_t n = 0;
      in >> n;
      std::getline(in, line);
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw IoError("gmsh: truncated $Elements");
        std::istringstream ls(line);
        long id = 0;
        int type = 0;
        int ntags = 0;
        ls >> id >> type >> ntags;
        std::vector<long> etags(static_cast<std::size_t>(std::max(ntags, 0)));
        for (auto& t : etags) ls >> t;
        const int physical = etags.empty() ? 0 : static_cast<int>(etags[0]);
        if (type == 1) {
          long a = 0, b = 0;
          if (!(ls >> a >> b)) throw IoError("gmsh: bad line element");
          facets.push_back({node(a), node(b), boundary_tag_from(physical)});
        } else if (type == 2) {
          long a = 0, b = 0, c = 0;
          if (!(ls >> a >> b >> c)) throw IoError("gmsh: bad triangle element");
          cells.push_back({node(a), node(b), node(c)});
          tags.push_back(physical == 0 ? CellTag::Fluid : cell_tag_from(physical));
        } else if (type != 15) {
          throw IoError("gmsh: unsupported element type " + std::to_string(type));
        }
      }
    }
  }
  if (!have_format) throw IoError("gmsh: missing $MeshFormat");
  if (cells.empty()) throw IoError("gmsh: no triangles");
  // Drop nodes that no triangle uses (e.g. geometry points).
  std::vector<std::size_t> remap(vertices.size(), npos);
  std::vector<Point> used;
  for (auto& t : cells)
    for (auto& v : t) {
      if (remap[v] == npos) {
        remap[v] = used.size();
        used.push_back(vertices[v]);
      }
      v = remap[v];
    }
  for (auto& f : facets) {
    if (remap[f.v0] == npos || remap[f.v1] == npos) throw IoError("gmsh: line element off the triangulation");
    f.v0 = remap[f.v0];
    f.v1 = remap[f.v1];
  }
  return Mesh(std::move(used), std::move(cells), std::move(tags), facets);
}

Mesh read_gmsh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open gmsh file '" + path + "'");
  return read_gmsh(in);
}

}  // namespace coanda
