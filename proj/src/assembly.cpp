#include "coanda/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "coanda/error.hpp"

namespace coanda {

PatternBuilder::PatternBuilder(std::size_t rows, std::size_t cols) : rows_(rows), columns_(cols) {}

void PatternBuilder::add(std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
  for (auto c : cols) {
    auto& col = columns_[c];
    for (auto r : rows) col.push_back(static_cast<int>(r));
  }
}

void PatternBuilder::add_diagonal() {
  const std::size_t n = std::min(rows_, columns_.size());
  for (std::size_t i = 0; i < n; ++i) columns_[i].push_back(static_cast<int>(i));
}

SparseMatrix PatternBuilder::build() {
  for (auto& col : columns_) {
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
  }
  SparseMatrix a(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(columns_.size()));
  // Fill column by column; insertion in sorted order keeps this linear.
  Eigen::VectorXi sizes(static_cast<Eigen::Index>(columns_.size()));
  for (std::size_t c = 0; c < columns_.size(); ++c) sizes[static_cast<Eigen::Index>(c)] = static_cast<int>(columns_[c].size());
  a.reserve(sizes);
  for (std::size_t c = 0; c < columns_.size(); ++c)
    for (int r : columns_[c]) a.insert(r, static_cast<Eigen::Index>(c)) = 0.0;
  a.makeCompressed();
  columns_.clear();
  columns_.shrink_to_fit();
  return a;
}

std::size_t pattern_index(const SparseMatrix& a, std::size_t row, std::size_t col) {
  const int* inner = a.innerIndexPtr();
  const int* begin = inner + a.outerIndexPtr()[col];
  const int* end = inner + a.outerIndexPtr()[col + 1];
  const int r = static_cast<int>(row);
  const int* it = std::lower_bound(begin, end, r);
  if (it == end || *it != r)
    throw Error("entry (" + std::to_string(row) + ", " + std::to_string(col) + ") is not in the sparsity pattern");
  return static_cast<std::size_t>(it - inner);
}

void scatter_slots(const SparseMatrix& a, std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                   std::vector<int>& out) {
  for (const std::size_t c : cols)
    for (const std::size_t r : rows) out.push_back(static_cast<int>(pattern_index(a, r, c)));
}

void apply_dirichlet(SparseMatrix& a, const std::vector<char>& constrained) {
  for (Eigen::Index c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      const bool row_c = constrained[static_cast<std::size_t>(it.row())] != 0;
      const bool col_c = constrained[static_cast<std::size_t>(c)] != 0;
      if (row_c || col_c) it.valueRef() = (it.row() == c) ? 1.0 : 0.0;
    }
  }
}

void cell_dofs(const FeSpace& space, std::size_t cell, std::size_t offset, std::vector<std::size_t>& out) {
  out.clear();
  for (auto n : space.cell_nodes(cell))
    for (int k = 0; k < space.components(); ++k) out.push_back(offset + space.dof(n, k));
}

Tabulation::Tabulation(int deg, const QuadratureRule& rule) : degree(deg), n(n_local_nodes(deg)) {
  values.resize(rule.size());
  grads.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    double g[6][2];
    reference_basis(deg, rule.points[q], values[q].data(), g);
    for (int i = 0; i < n; ++i) grads[q][i] = {g[i][0], g[i][1]};
  }
}

void physical_basis(const Tabulation& tab, std::size_t q, const CellMap& map, BasisAt& out) {
  out.n = tab.n;
  const auto& m = map.inv_t;
  for (int i = 0; i < tab.n; ++i) {
    out.v[i] = tab.values[q][i];
    const double gx = tab.grads[q][i][0];
    const double gy = tab.grads[q][i][1];
    out.g[i][0] = m(0, 0) * gx + m(0, 1) * gy;
    out.g[i][1] = m(1, 0) * gx + m(1, 1) * gy;
  }
}

SparseMatrix assemble_bilinear(const FeSpace& test, const FeSpace& trial, int quad_order,
                               const BilinearKernel& kernel) {
  if (&test.mesh() != &trial.mesh()) throw Error("assemble_bilinear: spaces on different meshes");
  const auto& rule = triangle_rule(quad_order);
  const Tabulation tt(test.degree(), rule);
  const Tabulation tr(trial.degree(), rule);
  PatternBuilder pb(test.n_dofs(), trial.n_dofs());
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (auto c : test.cells()) {
    if (!trial.active(c)) continue;
    cell_dofs(test, c, 0, rows);
    cell_dofs(trial, c, 0, cols);
    pb.add(rows, cols);
  }
  SparseMatrix a = pb.build();
  DenseMatrix local(static_cast<Eigen::Index>(test.nodes_per_cell() * test.components()),
                    static_cast<Eigen::Index>(trial.nodes_per_cell() * trial.components()));
  BasisAt bt;
  BasisAt br;
  for (auto c : test.cells()) {
    if (!trial.active(c)) continue;
    const CellMap map(test.mesh(), c);
    local.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      physical_basis(tt, q, map, bt);
      physical_basis(tr, q, map, br);
      kernel(bt, br, map.map(rule.points[q]), rule.weights[q] * std::abs(map.det), local);
    }
    cell_dofs(test, c, 0, rows);
    cell_dofs(trial, c, 0, cols);
    scatter_add(a, rows, cols, local);
  }
  return a;
}

const char* to_string(NormKind k) { return k == NormKind::L2 ? "L2" : "H1"; }

namespace {

SparseMatrix facet_mass(const FeSpace& space) {
  const int deg = space.degree();
  const int nl = deg + 1;
  const int nc = space.components();
  const auto& rule = line_rule(2 * deg);
  PatternBuilder pb(space.n_dofs(), space.n_dofs());
  std::vector<std::size_t> dofs;
  auto facet_dofs = [&](std::size_t e) {
    dofs.clear();
    const auto nodes = space.edge_nodes(e);
    for (int i = 0; i < nl; ++i)
      for (int k = 0; k < nc; ++k) dofs.push_back(space.dof(nodes[static_cast<std::size_t>(i)], k));
  };
  for (auto e : space.facet_edges()) {
    facet_dofs(e);
    pb.add(dofs, dofs);
  }
  SparseMatrix a = pb.build();
  DenseMatrix local(nl * nc, nl * nc);
  for (auto e : space.facet_edges()) {
    const double len = space.mesh().edge_length(e);
    local.setZero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double v[3];
      segment_basis(deg, rule.points[q], v);
      const double w = rule.weights[q] * len;
      for (int i = 0; i < nl; ++i)
        for (int j = 0; j < nl; ++j)
          for (int k = 0; k < nc; ++k) local(i * nc + k, j * nc + k) += w * v[i] * v[j];
    }
    facet_dofs(e);
    scatter_add(a, dofs, dofs, local);
  }
  return a;
}

}  // namespace

SparseMatrix mass_matrix(const FeSpace& space) {
  if (space.restriction() == Restriction::Interface) return facet_mass(space);
  const int nc = space.components();
  return assemble_bilinear(space, space, 2 * space.degree(),
                           [nc](const BasisAt& t, const BasisAt& r, const Point&, double w, DenseMatrix& l) {
                             for (int i = 0; i < t.n; ++i)
                               for (int j = 0; j < r.n; ++j)
                                 for (int k = 0; k < nc; ++k) l(i * nc + k, j * nc + k) += w * t.v[i] * r.v[j];
                           });
}

SparseMatrix stiffness_matrix(const FeSpace& space) {
  if (space.restriction() == Restriction::Interface)
    return SparseMatrix(static_cast<Eigen::Index>(space.n_dofs()), static_cast<Eigen::Index>(space.n_dofs()));
  const int nc = space.components();
  return assemble_bilinear(space, space, std::max(1, 2 * space.degree() - 2),
                           [nc](const BasisAt& t, const BasisAt& r, const Point&, double w, DenseMatrix& l) {
                             for (int i = 0; i < t.n; ++i)
                               for (int j = 0; j < r.n; ++j) {
                                 const double s = w * (t.g[i][0] * r.g[j][0] + t.g[i][1] * r.g[j][1]);
                                 for (int k = 0; k < nc; ++k) l(i * nc + k, j * nc + k) += s;
                               }
                           });
}

SparseMatrix norm_matrix(const FeSpace& space, NormKind kind) {
  SparseMatrix m = mass_matrix(space);
  if (kind == NormKind::H1) m += stiffness_matrix(space);
  m.makeCompressed();
  return m;
}

namespace {
int g_threads = 1;
}

void set_num_threads(int n) { g_threads = std::max(1, n); }
int num_threads() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
#ifdef _OPENMP
  if (g_threads > 1 && n > 1) {
    // Exceptions cannot cross the parallel region; keep the one from the
    // lowest index so the reported error does not depend on scheduling.
    const auto ln = static_cast<long>(n);
    std::exception_ptr first;
    long first_index = ln;
#pragma omp parallel for schedule(static) num_threads(g_threads)
    for (long i = 0; i < ln; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(coanda_parallel_for)
        {
          if (i < first_index) {
            first_index = i;
            first = std::current_exception();
          }
        }
      }
    }
    if (first) std::rethrow_exception(first);
    return;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace coanda
