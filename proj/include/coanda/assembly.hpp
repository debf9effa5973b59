#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "coanda/fe_space.hpp"
#include "coanda/linalg.hpp"
#include "coanda/quadrature.hpp"

namespace coanda {

/// Collects the (row, col) couplings of a global matrix before assembly.
class PatternBuilder {
 public:
  PatternBuilder(std::size_t rows, std::size_t cols);

  void add(std::span<const std::size_t> rows, std::span<const std::size_t> cols);
  void add_diagonal();
  /// Zero-valued matrix with the collected, sorted, unique pattern.
  SparseMatrix build();

 private:
  std::size_t rows_;
  std::vector<std::vector<int>> columns_;
};

/// Position of A(row, col) in A's value array. Throws if the entry is not in the pattern.
std::size_t pattern_index(const SparseMatrix& a, std::size_t row, std::size_t col);

/// Adds local(i, j) to A(rows[i], cols[j]). Every target must exist in the pattern.
template <class Derived>
void scatter_add(SparseMatrix& a, std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                 const Eigen::MatrixBase<Derived>& local) {
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  double* val = a.valuePtr();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const int* begin = inner + outer[cols[j]];
    const int* end = inner + outer[cols[j] + 1];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double v = local(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v == 0.0) continue;
      const int r = static_cast<int>(rows[i]);
      const int* it = std::lower_bound(begin, end, r);
      if (it == end || *it != r) val[pattern_index(a, rows[i], cols[j])] += v;
      else val[it - inner] += v;
    }
  }
}

/// Appends the value-array positions of A(rows[i], cols[j]) in column-major local
/// order, so a fixed pattern can be assembled repeatedly without searching.
void scatter_slots(const SparseMatrix& a, std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                   std::vector<int>& out);

/// Adds a column-major local matrix at slots from scatter_slots; returns the next slot.
template <class Derived>
const int* scatter_add_at(double* val, const int* slots, const Eigen::MatrixBase<Derived>& local) {
  for (Eigen::Index j = 0; j < local.cols(); ++j)
    for (Eigen::Index i = 0; i < local.rows(); ++i) val[*slots++] += local(i, j);
  return slots;
}

/// Replaces the rows and columns of constrained dofs by unit vectors.
void apply_dirichlet(SparseMatrix& a, const std::vector<char>& constrained);

/// Global dofs of a cell in local order (node-major, component-minor).
void cell_dofs(const FeSpace& space, std::size_t cell, std::size_t offset, std::vector<std::size_t>& out);

/// Reference basis tabulated at the points of a rule.
struct Tabulation {
  int degree = 1;
  int n = 3;
  std::vector<std::array<double, 6>> values;
  std::vector<std::array<std::array<double, 2>, 6>> grads;

  Tabulation(int degree, const QuadratureRule& rule);
};

/// Values and physical gradients of a cell's scalar basis at one quadrature point.
struct BasisAt {
  int n = 3;
  double v[6];
  double g[6][2];
};
void physical_basis(const Tabulation& tab, std::size_t q, const CellMap& map, BasisAt& out);

/// Cell kernel of a bilinear form on scalar bases: returns the integrand
/// a(phi_j, phi_i) at a point for each component pair.
using BilinearKernel = std::function<void(const BasisAt& test, const BasisAt& trial, const Point& x,
                                          double w, DenseMatrix& local)>;

/// Assembles a cell bilinear form over the test space's cells. `local` is
/// sized (test dofs per cell) x (trial dofs per cell) and is cleared per cell.
SparseMatrix assemble_bilinear(const FeSpace& test, const FeSpace& trial, int quad_order,
                               const BilinearKernel& kernel);

enum class NormKind { L2, H1 };
const char* to_string(NormKind k);

/// Mass matrix; interface spaces get the facet (1D) mass matrix.
SparseMatrix mass_matrix(const FeSpace& space);
/// Gradient-gradient matrix (zero for interface spaces).
SparseMatrix stiffness_matrix(const FeSpace& space);
/// L2: mass; H1: mass + stiffness.
SparseMatrix norm_matrix(const FeSpace& space, NormKind kind);

/// Runs body(i) for i in [0, n) on the configured worker threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);
void set_num_threads(int n);
int num_threads();

}  // namespace coanda
