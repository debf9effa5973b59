#pragma once

#include <array>
#include <vector>

namespace coanda {

/// Quadrature on the reference triangle {(xi, eta): xi, eta >= 0, xi + eta <= 1}.
/// Points are barycentric (l0, l1, l2) with xi = l1, eta = l2; weights sum to 1/2.
struct QuadratureRule {
  int order = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineRule {
  int order = 0;
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
};

/// Cheapest rule exact for polynomials of total degree <= order.
/// Throws Error for order > 6.
const QuadratureRule& triangle_rule(int order);

/// Throws Error for order > 9.
const LineRule& line_rule(int order);

}  // namespace coanda
