#include "coanda/pod_rom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "coanda/error.hpp"
#include "coanda/fe_space.hpp"

namespace coanda {

namespace {

constexpr double kRankTol = 1e-14;

using Cholesky = Eigen::SimplicialLLT<SparseMatrix>;

void factorize(Cholesky& chol, const SparseMatrix& m) {
  chol.compute(m);
  if (chol.info() != Eigen::Success) throw ConfigError("norm matrix is not symmetric positive definite");
}

// Modified Gram-Schmidt in the m inner product against `fixed` (already
// m-orthonormal) and the accepted columns. Columns whose norm drops below
// tol times their initial norm are dropped.
DenseMatrix m_orthonormalize(const SparseMatrix& m, const DenseMatrix& fixed, const DenseMatrix& cols, double tol) {
  DenseMatrix out(cols.rows(), 0);
  DenseMatrix mfixed = m * fixed;
  for (Eigen::Index k = 0; k < cols.cols(); ++k) {
    Vector c = cols.col(k);
    const double n0 = std::sqrt(std::max(0.0, c.dot(m * c)));
    if (!(n0 > 0.0)) continue;
    // Two passes keep the result orthogonal to round-off.
    for (int pass = 0; pass < 2; ++pass) {
      if (fixed.cols() > 0) c -= fixed * (mfixed.transpose() * c);
      for (Eigen::Index j = 0; j < out.cols(); ++j) c -= out.col(j) * out.col(j).dot(m * c);
    }
    const double n1 = std::sqrt(std::max(0.0, c.dot(m * c)));
    if (!(n1 > tol * n0)) continue;
    out.conservativeResize(Eigen::NoChange, out.cols() + 1);
    out.col(out.cols() - 1) = c / n1;
  }
  return out;
}

Vector block_of(const BlockLayout& l, const Vector& x, std::size_t b) {
  return x.segment(static_cast<Eigen::Index>(l.offset(b)), static_cast<Eigen::Index>(l.size(b)));
}

double m_norm(const SparseMatrix& m, const Vector& x) { return std::sqrt(std::max(0.0, x.dot(m * x))); }

}  // namespace

SnapshotSet collect_snapshots(const Model& model, const std::vector<BranchRecord>& records,
                              const std::string& field) {
  const auto& l = model.layout();
  const auto b = l.index(field);
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return records[i].mu < records[j].mu; });
  SnapshotSet s;
  s.field = field;
  s.s.resize(static_cast<Eigen::Index>(l.size(b)), static_cast<Eigen::Index>(records.size()));
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& r = records[order[k]];
    if (static_cast<std::size_t>(r.state.size()) != l.total()) throw Error("snapshot size does not match the model");
    s.s.col(static_cast<Eigen::Index>(k)) = block_of(l, r.state, b);
    s.mu.push_back(r.mu);
  }
  return s;
}

NormKind default_norm(const std::string& field) {
  return (field == "u" || field == "d_f" || field == "d_s") ? NormKind::H1 : NormKind::L2;
}

PodBasis pod(const SnapshotSet& s, const SparseMatrix& m, int n_rb, NormKind norm) {
  if (m.rows() != s.s.rows() || m.cols() != s.s.rows()) throw Error("norm matrix does not match snapshot size");
  if (n_rb < 1) throw ConfigError("N_rb must be at least 1");
  if (n_rb > s.s.cols())
    throw RankDeficient("field " + s.field + ": N_rb=" + std::to_string(n_rb) + " exceeds " +
                        std::to_string(s.s.cols()) + " snapshots");

  // With P M P^T = L L^T the M-norm of x is the Euclidean norm of L^T P x, so
  // the POD is the SVD of L^T P S. Working on the factor avoids squaring the
  // condition number as the Gramian S^T M S would.
  Cholesky chol;
  factorize(chol, m);
  const DenseMatrix ps = chol.permutationP() * s.s;
  const DenseMatrix sh = chol.matrixU() * ps;
  Eigen::JacobiSVD<DenseMatrix> svd(sh, Eigen::ComputeThinU);

  PodBasis out;
  out.field = s.field;
  out.norm = norm;
  out.sigma = svd.singularValues();
  if (out.sigma.size() == 0 || !(out.sigma[0] > 0.0)) throw RankDeficient("field " + s.field + ": snapshots are zero");
  out.sigma_hat = out.sigma / out.sigma[0];
  if (!(out.sigma_hat[n_rb - 1] >= kRankTol))
    throw RankDeficient("field " + s.field + ": N_rb=" + std::to_string(n_rb) + " exceeds the numerical rank");

  const DenseMatrix u = svd.matrixU().leftCols(n_rb);
  const DenseMatrix y = chol.matrixU().solve(u);
  DenseMatrix v = chol.permutationPinv() * y;
  out.v = m_orthonormalize(m, DenseMatrix(v.rows(), 0), v, 1e-8);
  if (out.v.cols() != n_rb) throw RankDeficient("field " + s.field + ": basis lost rank in orthonormalization");
  out.n_pod = n_rb;
  return out;
}

Vector project(const PodBasis& basis, const SparseMatrix& m, const Vector& x) {
  return basis.v * (basis.v.transpose() * (m * x));
}

std::vector<double> projection_errors(const PodBasis& basis, const SparseMatrix& m, const SnapshotSet& s,
                                      int n_max) {
  n_max = std::min(n_max, basis.n_pod);
  std::vector<double> out(static_cast<std::size_t>(std::max(n_max, 0)), 0.0);
  if (s.s.cols() == 0) return out;
  const DenseMatrix ms = m * s.s;
  const DenseMatrix c = basis.v.leftCols(n_max).transpose() * ms;  // modal coefficients
  for (Eigen::Index j = 0; j < s.s.cols(); ++j) {
    const double nx = std::sqrt(std::max(0.0, s.s.col(j).dot(ms.col(j))));
    const double scale = nx > 0.0 ? nx : 1.0;
    Vector r = s.s.col(j);
    for (int n = 0; n < n_max; ++n) {
      r -= c(n, j) * basis.v.col(n);
      out[static_cast<std::size_t>(n)] += m_norm(m, r) / scale;
    }
  }
  for (auto& e : out) e /= static_cast<double>(s.s.cols());
  return out;
}

DenseMatrix supremizers(const SparseMatrix& m, const SparseMatrix& b, const DenseMatrix& dual,
                        const DenseMatrix& primal) {
  if (b.rows() != m.rows() || b.cols() != dual.rows()) throw Error("supremizer operator has the wrong shape");
  Cholesky chol;
  factorize(chol, m);
  const DenseMatrix rhs = b * dual;
  DenseMatrix s(m.rows(), dual.cols());
  for (Eigen::Index k = 0; k < dual.cols(); ++k) s.col(k) = chol.solve(Vector(rhs.col(k)));
  return m_orthonormalize(m, primal, s, 1e-8);
}

double reduced_inf_sup(const SparseMatrix& b, const DenseMatrix& primal, const DenseMatrix& dual) {
  const DenseMatrix r = primal.transpose() * (b * dual);
  if (r.size() == 0) return 0.0;
  Eigen::JacobiSVD<DenseMatrix> svd(r);
  const auto& sv = svd.singularValues();
  // A wide matrix (fewer primal than dual modes) has a nontrivial kernel.
  return r.rows() < r.cols() ? 0.0 : sv[sv.size() - 1];
}

int OfflineSettings::n_for(const std::string& field) const {
  const auto it = n_rb_field.find(field);
  return it == n_rb_field.end() ? n_rb : it->second;
}

std::vector<std::pair<std::string, std::string>> supremizer_pairs(const BlockLayout& layout) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [dual, primal] : {std::pair<std::string, std::string>{"p", "u"}, {"l_u", "u"}, {"l_d", "d_f"}})
    if (layout.contains(dual) && layout.contains(primal)) out.emplace_back(dual, primal);
  return out;
}

std::vector<PodBasis> build_bases(const Model& model, const std::vector<BranchRecord>& train,
                                  const std::vector<SparseMatrix>& norms, const OfflineSettings& settings,
                                  double mu_ref) {
  const auto& l = model.layout();
  if (norms.size() != l.n_blocks()) throw Error("one norm matrix per block is required");
  std::vector<PodBasis> bases(l.n_blocks());
  parallel_for(l.n_blocks(), [&](std::size_t b) {
    const auto& name = l.name(b);
    bases[b] = pod(collect_snapshots(model, train, name), norms[b], settings.n_for(name), default_norm(name));
  });
  if (!settings.supremizers) return bases;

  const SparseMatrix j0 = model.sparse_jacobian(Vector::Zero(static_cast<Eigen::Index>(l.total())), mu_ref);
  for (const auto& [dual, primal] : supremizer_pairs(l)) {
    const auto bd = l.index(dual);
    const auto bp = l.index(primal);
    const SparseMatrix coupling =
        j0.block(static_cast<Eigen::Index>(l.offset(bp)), static_cast<Eigen::Index>(l.offset(bd)),
                 static_cast<Eigen::Index>(l.size(bp)), static_cast<Eigen::Index>(l.size(bd)));
    auto& pb = bases[bp];
    const DenseMatrix s = supremizers(norms[bp], coupling, bases[bd].v, pb.v);
    DenseMatrix v(pb.v.rows(), pb.v.cols() + s.cols());
    v << pb.v, s;
    pb.v = std::move(v);
    pb.n_supremizer += static_cast<int>(s.cols());
  }
  return bases;
}

std::vector<SparseMatrix> block_norms(const std::vector<const FeSpace*>& spaces, const BlockLayout& layout,
                                      const std::vector<char>& dirichlet) {
  if (spaces.size() != layout.n_blocks()) throw Error("block spaces do not match the layout");
  std::vector<SparseMatrix> out;
  for (std::size_t b = 0; b < layout.n_blocks(); ++b) {
    SparseMatrix m = norm_matrix(*spaces[b], default_norm(layout.name(b)));
    if (static_cast<std::size_t>(m.rows()) != layout.size(b)) throw Error("block space size mismatch");
    if (!dirichlet.empty()) {
      const auto first = dirichlet.begin() + static_cast<std::ptrdiff_t>(layout.offset(b));
      std::vector<char> mask(first, first + static_cast<std::ptrdiff_t>(layout.size(b)));
      apply_dirichlet(m, mask);
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ReducedModel::ProjectionCache {
  std::mutex lock;
  bool valid = false;
  std::vector<int> outer, inner;
  std::vector<double> values;
  std::vector<DenseMatrix> blocks;  ///< by row block * n_blocks + column block
};

ReducedModel::~ReducedModel() = default;

ReducedModel::ReducedModel(const Model& full, std::vector<PodBasis> bases, std::vector<SparseMatrix> norms)
    : full_(&full), bases_(std::move(bases)), norms_(std::move(norms)), cache_(std::make_unique<ProjectionCache>()) {
  const auto& l = full.layout();
  if (bases_.size() != l.n_blocks() || norms_.size() != l.n_blocks())
    throw Error("reduced model needs one basis and one norm per block");
  for (std::size_t b = 0; b < l.n_blocks(); ++b) {
    if (static_cast<std::size_t>(bases_[b].v.rows()) != l.size(b))
      throw Error("basis of " + l.name(b) + " does not match the block size");
    if (static_cast<std::size_t>(norms_[b].rows()) != l.size(b))
      throw Error("norm of " + l.name(b) + " does not match the block size");
    layout_.add(l.name(b), static_cast<std::size_t>(bases_[b].size()));
    rows_.emplace_back(bases_[b].v);
    row_block_.insert(row_block_.end(), l.size(b), static_cast<int>(b));
  }
}

Vector ReducedModel::lift(const Vector& a) const {
  const auto& l = full_->layout();
  Vector x(static_cast<Eigen::Index>(l.total()));
  for (std::size_t b = 0; b < l.n_blocks(); ++b)
    x.segment(static_cast<Eigen::Index>(l.offset(b)), static_cast<Eigen::Index>(l.size(b))) =
        bases_[b].v * block_of(layout_, a, b);
  return x;
}

Vector ReducedModel::restrict(const Vector& x) const {
  const auto& l = full_->layout();
  Vector a(static_cast<Eigen::Index>(layout_.total()));
  for (std::size_t b = 0; b < l.n_blocks(); ++b)
    a.segment(static_cast<Eigen::Index>(layout_.offset(b)), static_cast<Eigen::Index>(layout_.size(b))) =
        bases_[b].v.transpose() * (norms_[b] * block_of(l, x, b));
  return a;
}

void ReducedModel::evaluate(const Vector& a, double mu, Vector* residual, Jacobian* jacobian) const {
  const auto& l = full_->layout();
  const Vector x = lift(a);
  Vector f;
  Jacobian j;
  full_->evaluate(x, mu, residual ? &f : nullptr, jacobian ? &j : nullptr);
  const auto nb = l.n_blocks();
  if (residual) {
    residual->resize(static_cast<Eigen::Index>(layout_.total()));
    for (std::size_t b = 0; b < nb; ++b)
      residual->segment(static_cast<Eigen::Index>(layout_.offset(b)), static_cast<Eigen::Index>(layout_.size(b))) =
          bases_[b].v.transpose() * block_of(l, f, b);
  }
  if (!jacobian) return;
  const auto& jf = std::get<SparseMatrix>(j);
  const auto nr = static_cast<Eigen::Index>(layout_.total());
  const auto off = [&](std::size_t b) { return static_cast<Eigen::Index>(l.offset(b)); };
  const auto len = [&](std::size_t b) { return static_cast<Eigen::Index>(l.size(b)); };
  const auto roff = [&](std::size_t b) { return static_cast<Eigen::Index>(layout_.offset(b)); };
  const auto rlen = [&](std::size_t b) { return static_cast<Eigen::Index>(layout_.size(b)); };
  // Each reduced block V_r^T J_rc V_c is formed only where J_rc has entries, and only
  // when they differ from the previous call. Blocks with fewer entries than columns
  // (multiplier couplings) are summed entry by entry; the rest go through
  // W = J_rc^T V_r, built row-wise, and a dense product W^T V_c.
  std::lock_guard<std::mutex> guard(cache_->lock);
  auto& cache = *cache_;
  const int* outer = jf.outerIndexPtr();
  const int* inner = jf.innerIndexPtr();
  const double* val = jf.valuePtr();
  const auto n = static_cast<std::size_t>(jf.outerSize());
  const auto nz = static_cast<std::size_t>(jf.nonZeros());
  const bool same_pattern = cache.valid && cache.outer.size() == n + 1 && cache.inner.size() == nz &&
                            std::equal(outer, outer + n + 1, cache.outer.begin()) &&
                            std::equal(inner, inner + nz, cache.inner.begin());
  std::vector<Eigen::Index> nnz(nb * nb, 0);
  std::vector<char> changed(nb * nb, same_pattern ? 0 : 1);
  for (std::size_t col = 0; col < n; ++col) {
    const auto c = static_cast<std::size_t>(row_block_[col]);
    for (auto k = static_cast<std::size_t>(outer[col]); k < static_cast<std::size_t>(outer[col + 1]); ++k) {
      const std::size_t pair = static_cast<std::size_t>(row_block_[static_cast<std::size_t>(inner[k])]) * nb + c;
      ++nnz[pair];
      if (same_pattern && !(val[k] == cache.values[k])) changed[pair] = 1;
    }
  }
  cache.blocks.resize(nb * nb);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < nb; ++r)
    for (std::size_t c = 0; c < nb; ++c)
      if (nnz[r * nb + c] > 0 && rlen(r) > 0 && rlen(c) > 0 && changed[r * nb + c]) pairs.emplace_back(r, c);
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [r, c] = pairs[k];
    const Eigen::Index r0 = off(r), r1 = off(r) + len(r);
    DenseMatrix& g = cache.blocks[r * nb + c];
    if (nnz[r * nb + c] < len(c)) {
      g.setZero(rlen(r), rlen(c));
      for (Eigen::Index jl = 0; jl < len(c); ++jl)
        for (SparseMatrix::InnerIterator it(jf, off(c) + jl); it; ++it)
          if (it.row() >= r0 && it.row() < r1)
            g.noalias() += it.value() * rows_[r].row(it.row() - r0).transpose() * rows_[c].row(jl);
      return;
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(len(c), rlen(r));
    const Eigen::Index m = rlen(r);
    const double* vr = rows_[r].data();
    for (Eigen::Index jl = 0; jl < len(c); ++jl) {
      const auto col = static_cast<std::size_t>(off(c) + jl);
      const int* lo = std::lower_bound(inner + outer[col], inner + outer[col + 1], static_cast<int>(r0));
      const int* hi = std::lower_bound(lo, inner + outer[col + 1], static_cast<int>(r1));
      double* wr = w.data() + jl * m;
      for (const int* e = lo; e != hi; ++e) {
        const double v = val[e - inner];
        const double* src = vr + (*e - r0) * m;
        for (Eigen::Index t = 0; t < m; ++t) wr[t] += v * src[t];
      }
    }
    g.noalias() = w.transpose() * bases_[c].v;
  });
  if (!same_pattern) {
    cache.outer.assign(outer, outer + n + 1);
    cache.inner.assign(inner, inner + nz);
  }
  cache.values.assign(val, val + nz);
  cache.valid = true;
  DenseMatrix jr = DenseMatrix::Zero(nr, nr);
  for (std::size_t r = 0; r < nb; ++r)
    for (std::size_t c = 0; c < nb; ++c)
      if (nnz[r * nb + c] > 0 && rlen(r) > 0 && rlen(c) > 0)
        jr.block(roff(r), roff(c), rlen(r), rlen(c)) = cache.blocks[r * nb + c];
  *jacobian = std::move(jr);
}

std::optional<Vector> ReducedModel::antisymmetric_seed() const {
  const auto s = full_->antisymmetric_seed();
  if (!s) return std::nullopt;
  // The seed acts on the residual, so it is projected like one.
  const auto& l = full_->layout();
  Vector a(static_cast<Eigen::Index>(layout_.total()));
  for (std::size_t b = 0; b < l.n_blocks(); ++b)
    a.segment(static_cast<Eigen::Index>(layout_.offset(b)), static_cast<Eigen::Index>(layout_.size(b))) =
        bases_[b].v.transpose() * block_of(l, *s, b);
  return a;
}

// ---------------------------------------------------------------------------

RomErrors rom_errors(const ReducedModel& rom, const std::vector<BranchRecord>& full,
                     const std::vector<BranchRecord>& reduced) {
  if (full.empty()) throw Error("no full-order records");
  if (!reduced.empty() && reduced.size() != full.size()) throw Error("mismatched mu grids");
  const auto& l = rom.full().layout();
  const auto& bases = rom.bases();
  RomErrors out;
  std::vector<Vector> lifted;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (std::abs(reduced[i].mu - full[i].mu) > 1e-12 * std::max(1.0, std::abs(full[i].mu)))
      throw Error("mismatched mu grids");
    lifted.push_back(rom.lift(reduced[i].state));
  }
  for (std::size_t b = 0; b < l.n_blocks(); ++b) {
    const auto& m = rom.norm(b);
    FieldErrors e;
    e.rb = reduced.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
      const Vector xh = block_of(l, full[i].state, b);
      const double nx = m_norm(m, xh);
      const double scale = nx > 0.0 ? nx : 1.0;
      e.proj += m_norm(m, xh - project(bases[b], m, xh)) / scale;
      if (!reduced.empty()) e.rb += m_norm(m, xh - block_of(l, lifted[i], b)) / scale;
    }
    e.proj /= static_cast<double>(full.size());
    if (!reduced.empty()) e.rb /= static_cast<double>(full.size());
    out[l.name(b)] = e;
  }
  return out;
}

Vector pointwise_error(const Vector& xh, const Vector& xrb, const SparseMatrix& m) {
  const double n = m_norm(m, xh);
  return (xh - xrb).cwiseAbs() / (n > 0.0 ? n : 1.0);
}

// ---------------------------------------------------------------------------

namespace {

static_assert(std::endian::native == std::endian::little, "basis files are written in native little-endian order");

constexpr char kMagic[8] = {'C', 'O', 'A', 'N', 'D', 'A', 'R', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated basis file");
  return v;
}

void put_doubles(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw IoError("truncated basis file");
}

}  // namespace

void write_basis(const std::filesystem::path& file, const PodBasis& basis) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + file.string());
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(basis.field.size()));
  os.write(basis.field.data(), static_cast<std::streamsize>(basis.field.size()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(basis.v.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(basis.v.cols()));
  put_doubles(os, basis.v.data(), static_cast<std::size_t>(basis.v.size()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(basis.sigma_hat.size()));
  put_doubles(os, basis.sigma_hat.data(), static_cast<std::size_t>(basis.sigma_hat.size()));
  // Trailer: norm kind, POD/supremizer split and the unnormalized singular values.
  put<std::uint32_t>(os, basis.norm == NormKind::H1 ? 1u : 0u);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(basis.n_pod));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(basis.n_supremizer));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(basis.sigma.size()));
  put_doubles(os, basis.sigma.data(), static_cast<std::size_t>(basis.sigma.size()));
  if (!os) throw IoError("failed writing " + file.string());
}

PodBasis read_basis(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoError("cannot read " + file.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw IoError(file.string() + " is not a basis file");
  if (get<std::uint32_t>(is) != kVersion) throw IoError(file.string() + ": unsupported basis version");
  PodBasis b;
  b.field.resize(get<std::uint32_t>(is));
  is.read(b.field.data(), static_cast<std::streamsize>(b.field.size()));
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  b.v.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  get_doubles(is, b.v.data(), rows * cols);
  b.sigma_hat.resize(static_cast<Eigen::Index>(get<std::uint64_t>(is)));
  get_doubles(is, b.sigma_hat.data(), static_cast<std::size_t>(b.sigma_hat.size()));
  b.norm = get<std::uint32_t>(is) == 1u ? NormKind::H1 : NormKind::L2;
  b.n_pod = static_cast<int>(get<std::uint64_t>(is));
  b.n_supremizer = static_cast<int>(get<std::uint64_t>(is));
  b.sigma.resize(static_cast<Eigen::Index>(get<std::uint64_t>(is)));
  get_doubles(is, b.sigma.data(), static_cast<std::size_t>(b.sigma.size()));
  if (b.n_pod + b.n_supremizer != static_cast<int>(cols)) throw IoError(file.string() + ": inconsistent column split");
  return b;
}

}  // namespace coanda
