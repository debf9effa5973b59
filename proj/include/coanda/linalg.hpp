#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace coanda {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
/// Compressed column storage with sorted, unique row indices per column.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Direct sparse LU (UMFPACK) with fill-reducing ordering and partial pivoting.
///
/// The symbolic analysis is kept and reused as long as the sparsity pattern
/// of the factorized matrix does not change.
class SparseLu {
 public:
  SparseLu() = default;
  ~SparseLu();
  SparseLu(const SparseLu&) = delete;
  SparseLu& operator=(const SparseLu&) = delete;
  SparseLu(SparseLu&& other) noexcept;
  SparseLu& operator=(SparseLu&& other) noexcept;

  /// Throws SingularMatrix when a zero pivot is met.
  void factorize(const SparseMatrix& a);
  Vector solve(const Vector& b) const;
  /// Solves A^T x = b.
  Vector solve_transposed(const Vector& b) const;

  bool factorized() const { return numeric_ != nullptr; }
  std::size_t symbolic_count() const { return symbolic_count_; }

 private:
  void release_numeric();
  void release_symbolic();
  Vector solve_impl(const Vector& b, int sys) const;

  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  int n_ = 0;
  std::vector<int> outer_;
  std::vector<int> inner_;
  std::vector<double> values_;
  std::size_t symbolic_count_ = 0;
};

/// One-shot factorize-and-solve.
Vector solve_sparse(const SparseMatrix& a, const Vector& b);

/// Named, contiguous blocks of a monolithic coefficient vector.
class BlockLayout {
 public:
  void add(const std::string& name, std::size_t size);

  std::size_t n_blocks() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  std::size_t size(std::size_t i) const { return sizes_[i]; }
  /// Throws NotFound for unknown names.
  std::size_t index(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t total() const { return total_; }

  bool operator==(const BlockLayout& o) const {
    return names_ == o.names_ && sizes_ == o.sizes_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> sizes_;
  std::size_t total_ = 0;
};

/// Monolithic unknown split into named blocks.
struct BlockState {
  BlockLayout layout;
  Vector values;

  BlockState() = default;
  explicit BlockState(BlockLayout l) : layout(std::move(l)), values(Vector::Zero(static_cast<Eigen::Index>(layout.total()))) {}
  BlockState(BlockLayout l, Vector v);

  auto block(const std::string& name) {
    const auto i = layout.index(name);
    return values.segment(static_cast<Eigen::Index>(layout.offset(i)),
                          static_cast<Eigen::Index>(layout.size(i)));
  }
  auto block(const std::string& name) const {
    const auto i = layout.index(name);
    return values.segment(static_cast<Eigen::Index>(layout.offset(i)),
                          static_cast<Eigen::Index>(layout.size(i)));
  }
};

}  // namespace coanda
