#pragma once

// Cell kernel of the steady incompressible momentum and continuity equations,
// written in the reference frame of the ALE map x = X + d(X):
//
//   momentum:   rho (G C^T u) . v + S : grad v
//   continuity: -(G : C) q
//
// with G = grad u, F = I + grad d, J = det F, C = cof F = J F^{-T} and
// S = (rho mu / J) (G C^T C + C G^T C) - p C. Without d this is the Eulerian
// form rho (grad u) u . v + sigma : grad v with sigma = rho mu (G + G^T) - p I.

#include <Eigen/Dense>

#include "coanda/assembly.hpp"
#include "coanda/error.hpp"

namespace coanda::detail {

using Vec12 = Eigen::Matrix<double, 12, 1>;
using Vec3 = Eigen::Matrix<double, 3, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;

struct FluidLocal {
  Vec12 ru;
  Vec3 rp;
  Mat12 juu;
  Eigen::Matrix<double, 12, 3> jup;
  Eigen::Matrix<double, 3, 12> jpu;
  Mat12 jud;
  Eigen::Matrix<double, 3, 12> jpd;
};

struct FluidCoeffs {
  double rho = 1.0;
  double mu = 1.0;
  bool convection = true;
};

inline Eigen::Matrix2d cofactor(const Eigen::Matrix2d& f) {
  Eigen::Matrix2d c;
  c << f(1, 1), -f(1, 0), -f(0, 1), f(0, 0);
  return c;
}

/// u, d: 12 local coefficients (node-major); p: 3. d == nullptr selects the
/// Eulerian form and leaves jud/jpd untouched.
inline void fluid_cell(std::size_t cell, const QuadratureRule& rule, const Tabulation& t2,
                       const Tabulation& t1, const CellMap& map, const double* u, const double* p,
                       const double* d, const FluidCoeffs& k, bool want_jacobian, FluidLocal& out) {
  out.ru.setZero();
  out.rp.setZero();
  if (want_jacobian) {
    out.juu.setZero();
    out.jup.setZero();
    out.jpu.setZero();
    if (d) {
      out.jud.setZero();
      out.jpd.setZero();
    }
  }
  const double rho = k.rho;
  const double rm = k.rho * k.mu;
  const double conv = k.convection ? 1.0 : 0.0;
  BasisAt b2;
  BasisAt b1;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    physical_basis(t2, q, map, b2);
    physical_basis(t1, q, map, b1);
    const double w = rule.weights[q] * std::abs(map.det);
    Eigen::Vector2d uq = Eigen::Vector2d::Zero();
    Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d f = Eigen::Matrix2d::Identity();
    for (int a = 0; a < 6; ++a) {
      for (int c = 0; c < 2; ++c) {
        const double ua = u[2 * a + c];
        uq[c] += ua * b2.v[a];
        g(c, 0) += ua * b2.g[a][0];
        g(c, 1) += ua * b2.g[a][1];
        if (d) {
          f(c, 0) += d[2 * a + c] * b2.g[a][0];
          f(c, 1) += d[2 * a + c] * b2.g[a][1];
        }
      }
    }
    double pq = 0.0;
    for (int a = 0; a < 3; ++a) pq += p[a] * b1.v[a];
    const Eigen::Matrix2d cof = d ? cofactor(f) : Eigen::Matrix2d::Identity();
    const double jac = d ? f.determinant() : 1.0;
    if (!(jac > 0.0)) throw MeshInversion(cell, jac);
    const double s = rm / jac;
    const Eigen::Matrix2d ctc = cof.transpose() * cof;
    const Eigen::Matrix2d visc = s * (g * ctc + cof * g.transpose() * cof);
    const Eigen::Matrix2d stress = visc - pq * cof;
    const Eigen::Vector2d cvec = conv * rho * (g * (cof.transpose() * uq));
    const double div = (g.cwiseProduct(cof)).sum();
    for (int i = 0; i < 6; ++i) {
      for (int c = 0; c < 2; ++c) {
        out.ru[2 * i + c] +=
            w * (cvec[c] * b2.v[i] + stress(c, 0) * b2.g[i][0] + stress(c, 1) * b2.g[i][1]);
      }
    }
    for (int i = 0; i < 3; ++i) out.rp[i] -= w * div * b1.v[i];
    if (!want_jacobian) continue;

    const Eigen::Vector2d ctu = cof.transpose() * uq;
    // d/du
    for (int j = 0; j < 6; ++j) {
      const Eigen::Vector2d gj(b2.g[j][0], b2.g[j][1]);
      for (int gam = 0; gam < 2; ++gam) {
        Eigen::Matrix2d dg = Eigen::Matrix2d::Zero();
        dg.row(gam) = gj.transpose();
        Eigen::Vector2d du = Eigen::Vector2d::Zero();
        du[gam] = b2.v[j];
        const Eigen::Vector2d dc = conv * rho * (dg * ctu + g * (cof.transpose() * du));
        const Eigen::Matrix2d ds = s * (dg * ctc + cof * dg.transpose() * cof);
        const double ddiv = cof.row(gam).dot(gj);
        const int col = 2 * j + gam;
        for (int i = 0; i < 6; ++i)
          for (int c = 0; c < 2; ++c)
            out.juu(2 * i + c, col) += w * (dc[c] * b2.v[i] + ds(c, 0) * b2.g[i][0] + ds(c, 1) * b2.g[i][1]);
        for (int i = 0; i < 3; ++i) out.jpu(i, col) -= w * ddiv * b1.v[i];
      }
    }
    // d/dp
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c)
          out.jup(2 * i + c, j) -= w * b1.v[j] * (cof(c, 0) * b2.g[i][0] + cof(c, 1) * b2.g[i][1]);
    if (!d) continue;
    // d/dd: shape derivatives through C and J.
    const Eigen::Matrix2d gt = g.transpose();
    for (int j = 0; j < 6; ++j) {
      for (int gam = 0; gam < 2; ++gam) {
        Eigen::Matrix2d df = Eigen::Matrix2d::Zero();
        df(gam, 0) = b2.g[j][0];
        df(gam, 1) = b2.g[j][1];
        const Eigen::Matrix2d dcof = cofactor(df);
        const double djac = (cof.cwiseProduct(df)).sum();
        const Eigen::Vector2d dc = conv * rho * (g * (dcof.transpose() * uq));
        const Eigen::Matrix2d ds =
            -(djac / jac) * visc +
            s * (g * (dcof.transpose() * cof + cof.transpose() * dcof) + dcof * gt * cof + cof * gt * dcof) -
            pq * dcof;
        const double ddiv = (g.cwiseProduct(dcof)).sum();
        const int col = 2 * j + gam;
        for (int i = 0; i < 6; ++i)
          for (int c = 0; c < 2; ++c)
            out.jud(2 * i + c, col) += w * (dc[c] * b2.v[i] + ds(c, 0) * b2.g[i][0] + ds(c, 1) * b2.g[i][1]);
        for (int i = 0; i < 3; ++i) out.jpd(i, col) -= w * ddiv * b1.v[i];
      }
    }
  }
}

}  // namespace coanda::detail
