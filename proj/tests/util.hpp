#pragma once

#include <random>

#include "coanda/mesh.hpp"

namespace coanda::fixtures {

// Unit square split along the (0,0)-(1,1) diagonal.
inline Mesh unit_square() {
  std::vector<Point> v{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<std::size_t, 3>> c{{0, 1, 2}, {0, 2, 3}};
  std::vector<FacetSpec> f{{0, 1, BoundaryTag::Wall}, {1, 2, BoundaryTag::Outlet},
                           {2, 3, BoundaryTag::Wall}, {3, 0, BoundaryTag::Inlet}};
  return Mesh(v, c, {CellTag::Fluid, CellTag::Fluid}, f);
}

inline Mesh straight_channel(double length, double height, double h, bool symmetric = false) {
  ChannelGeometry g;
  g.length = length;
  g.height = height;
  return build_channel_mesh(g, h, MeshVariant::Straight, symmetric);
}

inline bool point_in_triangle(const Mesh& m, std::size_t c, const Point& p, double tol = 1e-12) {
  const auto b = barycentric(m, c, p);
  return b[0] >= -tol && b[1] >= -tol && b[2] >= -tol;
}

}  // namespace coanda::fixtures
