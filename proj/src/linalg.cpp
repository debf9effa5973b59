#include "coanda/linalg.hpp"

#include <cmath>
#include <utility>

#include <umfpack.h>

#include "coanda/error.hpp"

namespace coanda {

SparseLu::~SparseLu() {
  release_numeric();
  release_symbolic();
}

SparseLu::SparseLu(SparseLu&& other) noexcept { *this = std::move(other); }

SparseLu& SparseLu::operator=(SparseLu&& other) noexcept {
  if (this != &other) {
    release_numeric();
    release_symbolic();
    symbolic_ = std::exchange(other.symbolic_, nullptr);
    numeric_ = std::exchange(other.numeric_, nullptr);
    n_ = other.n_;
    outer_ = std::move(other.outer_);
    inner_ = std::move(other.inner_);
    values_ = std::move(other.values_);
    symbolic_count_ = other.symbolic_count_;
  }
  return *this;
}

void SparseLu::release_numeric() {
  if (numeric_) umfpack_di_free_numeric(&numeric_);
  numeric_ = nullptr;
}

void SparseLu::release_symbolic() {
  if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
  symbolic_ = nullptr;
}

void SparseLu::factorize(const SparseMatrix& a_in) {
  if (a_in.rows() != a_in.cols()) throw Error("SparseLu: matrix is not square");
  SparseMatrix a = a_in;
  a.makeCompressed();
  const int n = static_cast<int>(a.rows());
  const int nnz = static_cast<int>(a.nonZeros());
  for (int k = 0; k < nnz; ++k)
    if (!std::isfinite(a.valuePtr()[k])) throw SingularMatrix(-1, "SparseLu: non-finite matrix entry");

  const bool same_pattern =
      symbolic_ && n == n_ && static_cast<int>(inner_.size()) == nnz &&
      std::equal(outer_.begin(), outer_.end(), a.outerIndexPtr()) &&
      std::equal(inner_.begin(), inner_.end(), a.innerIndexPtr());
  release_numeric();
  if (!same_pattern) {
    release_symbolic();
    n_ = n;
    outer_.assign(a.outerIndexPtr(), a.outerIndexPtr() + n + 1);
    inner_.assign(a.innerIndexPtr(), a.innerIndexPtr() + nnz);
  }
  values_.assign(a.valuePtr(), a.valuePtr() + nnz);

  double control[UMFPACK_CONTROL];
  umfpack_di_defaults(control);
  if (!symbolic_) {
    const int st = umfpack_di_symbolic(n, n, outer_.data(), inner_.data(), values_.data(), &symbolic_,
                                       control, nullptr);
    if (st != UMFPACK_OK) {
      symbolic_ = nullptr;
      if (st == UMFPACK_ERROR_out_of_memory) throw Error("SparseLu: out of memory");
      throw SingularMatrix(-1, "SparseLu: symbolic analysis failed (status " + std::to_string(st) + ")");
    }
    ++symbolic_count_;
  }
  const int st = umfpack_di_numeric(outer_.data(), inner_.data(), values_.data(), symbolic_, &numeric_,
                                    control, nullptr);
  if (st == UMFPACK_WARNING_singular_matrix) {
    // Locate the first zero on the diagonal of U and map it back to a column.
    std::ptrdiff_t pivot = -1;
    int lnz = 0, unz = 0, nr = 0, nc = 0, nz_udiag = 0;
    umfpack_di_get_lunz(&lnz, &unz, &nr, &nc, &nz_udiag, numeric_);
    std::vector<int> lp(n + 1), lj(std::max(lnz, 1)), up(n + 1), ui(std::max(unz, 1)), p(n), q(n);
    std::vector<double> lx(std::max(lnz, 1)), ux(std::max(unz, 1)), d(n);
    int do_recip = 0;
    if (umfpack_di_get_numeric(lp.data(), lj.data(), lx.data(), up.data(), ui.data(), ux.data(),
                               p.data(), q.data(), d.data(), &do_recip, nullptr, numeric_) == UMFPACK_OK) {
      for (int k = 0; k < n; ++k) {
        if (d[k] == 0.0) {
          pivot = q[k];
          break;
        }
      }
    }
    release_numeric();
    throw SingularMatrix(pivot, "SparseLu: matrix is singular (zero pivot at column " +
                                    std::to_string(pivot) + ")");
  }
  if (st != UMFPACK_OK) {
    release_numeric();
    throw SingularMatrix(-1, "SparseLu: numeric factorization failed (status " + std::to_string(st) + ")");
  }
}

Vector SparseLu::solve_impl(const Vector& b, int sys) const {
  if (!numeric_) throw Error("SparseLu: solve before factorize");
  if (b.size() != n_) throw Error("SparseLu: right-hand side has wrong length");
  Vector x(n_);
  double control[UMFPACK_CONTROL];
  umfpack_di_defaults(control);
  const int st = umfpack_di_solve(sys, outer_.data(), inner_.data(), values_.data(), x.data(), b.data(),
                                  numeric_, control, nullptr);
  if (st != UMFPACK_OK && st != UMFPACK_WARNING_singular_matrix)
    throw Error("SparseLu: solve failed (status " + std::to_string(st) + ")");
  if (!x.allFinite()) throw SingularMatrix(-1, "SparseLu: solution is not finite");
  return x;
}

Vector SparseLu::solve(const Vector& b) const { return solve_impl(b, UMFPACK_A); }

Vector SparseLu::solve_transposed(const Vector& b) const { return solve_impl(b, UMFPACK_At); }

Vector solve_sparse(const SparseMatrix& a, const Vector& b) {
  SparseLu lu;
  lu.factorize(a);
  return lu.solve(b);
}

void BlockLayout::add(const std::string& name, std::size_t size) {
  if (contains(name)) throw Error("duplicate block '" + name + "'");
  names_.push_back(name);
  offsets_.push_back(total_);
  sizes_.push_back(size);
  total_ += size;
}

std::size_t BlockLayout::index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw NotFound("no block named '" + name + "'");
}

bool BlockLayout::contains(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

BlockState::BlockState(BlockLayout l, Vector v) : layout(std::move(l)), values(std::move(v)) {
  if (static_cast<std::size_t>(values.size()) != layout.total())
    throw Error("state length does not match its block layout");
}

}  // namespace coanda
