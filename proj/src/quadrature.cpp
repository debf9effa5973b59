#include "coanda/quadrature.hpp"

#include <algorithm>
#include <string>

#include "coanda/error.hpp"

namespace coanda {

namespace {

void add_orbit3(QuadratureRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  r.points.push_back({b, a, a});
  r.points.push_back({a, b, a});
  r.points.push_back({a, a, b});
  for (int k = 0; k < 3; ++k) r.weights.push_back(0.5 * w);
}

void add_orbit6(QuadratureRule& r, double a, double b, double c, double w) {
  const std::array<std::array<double, 3>, 6> p{{{a, b, c}, {a, c, b}, {b, a, c},
                                               {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& q : p) {
    r.points.push_back(q);
    r.weights.push_back(0.5 * w);
  }
}

QuadratureRule make_rule(int order) {
  QuadratureRule r;
  r.order = order;
  switch (order) {
    case 1:
      r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(0.5);
      break;
    case 2:
      add_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      // Dunavant, 6 points.
      add_orbit3(r, 0.445948490915965, 0.223381589678011);
      add_orbit3(r, 0.091576213509771, 0.109951743655322);
      break;
    case 6:
      // Dunavant, 12 points.
      add_orbit3(r, 0.249286745170910, 0.116786275726379);
      add_orbit3(r, 0.063089014491502, 0.050844906370207);
      add_orbit6(r, 0.310352451033784, 0.636502499121399, 0.053145049844817, 0.082851075618374);
      break;
    default:
      break;
  }
  return r;
}

LineRule make_line(int n) {
  LineRule r;
  r.order = 2 * n - 1;
  std::vector<double> x;
  std::vector<double> w;
  switch (n) {
    case 1: x = {0.0}; w = {2.0}; break;
    case 2: x = {-0.5773502691896257645, 0.5773502691896257645}; w = {1.0, 1.0}; break;
    case 3:
      x = {-0.7745966692414833770, 0.0, 0.7745966692414833770};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    case 4:
      x = {-0.8611363115940525752, -0.3399810435848562648, 0.3399810435848562648,
           0.8611363115940525752};
      w = {0.3478548451374538574, 0.6521451548625461426, 0.6521451548625461426,
           0.3478548451374538574};
      break;
    default:
      x = {-0.9061798459386639928, -0.5384693101056830910, 0.0, 0.5384693101056830910,
           0.9061798459386639928};
      w = {0.2369268850561890875, 0.4786286704993664680, 0.5688888888888888889,
           0.4786286704993664680, 0.2369268850561890875};
      break;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.points.push_back(0.5 * (x[i] + 1.0));
    r.weights.push_back(0.5 * w[i]);
  }
  return r;
}

}  // namespace

const QuadratureRule& triangle_rule(int order) {
  static const std::array<QuadratureRule, 4> rules{make_rule(1), make_rule(2), make_rule(4),
                                                   make_rule(6)};
  if (order <= 1) return rules[0];
  if (order == 2) return rules[1];
  if (order <= 4) return rules[2];
  if (order <= 6) return rules[3];
  throw Error("no triangle quadrature rule of order " + std::to_string(order));
}

const LineRule& line_rule(int order) {
  static const std::array<LineRule, 5> rules{make_line(1), make_line(2), make_line(3),
                                             make_line(4), make_line(5)};
  if (order > 9) throw Error("no line quadrature rule of order " + std::to_string(order));
  const int n = std::max(1, (order + 2) / 2);
  return rules[static_cast<std::size_t>(n - 1)];
}

}  // namespace coanda
