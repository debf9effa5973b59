#pragma once

#include <iosfwd>
#include <string>

#include "coanda/mesh.hpp"

namespace coanda {

/// Native text format:
///   vertices N / N lines "x y" / cells M / M lines "i j k tag" / facets K / K lines "i j tag"
void write_mesh(const Mesh& mesh, std::ostream& out);
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::string& path);

/// Gmsh MSH 2.2 ASCII. Triangles (type 2) carry the cell tag as their
/// physical tag (1 fluid, 2 solid); lines (type 1) carry the boundary tag.
/// Fluid/solid edges without a line element are tagged as FSI interface.
Mesh read_gmsh(std::istream& in);
Mesh read_gmsh(const std::string& path);

}  // namespace coanda
