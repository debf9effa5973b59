#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coanda/assembly.hpp"
#include "coanda/model.hpp"
#include "coanda/solver.hpp"

namespace coanda {

/// Snapshots of one field: column j is the field at mu[j].
struct SnapshotSet {
  std::string field;
  DenseMatrix s;
  std::vector<double> mu;
};

/// Collects the columns of block `field` from branch records, ordered by mu.
SnapshotSet collect_snapshots(const Model& model, const std::vector<BranchRecord>& records, const std::string& field);

struct PodBasis {
  std::string field;
  NormKind norm = NormKind::L2;
  DenseMatrix v;           ///< M-orthonormal columns
  Vector sigma;            ///< singular values of S in the M-norm, all of them
  Vector sigma_hat;        ///< sigma / sigma(0)
  int n_pod = 0;           ///< leading columns that are POD modes
  int n_supremizer = 0;    ///< trailing supremizer columns

  int size() const { return static_cast<int>(v.cols()); }
};

/// POD of S in the inner product of the SPD matrix m. Throws RankDeficient
/// when n_rb exceeds the numerical rank (sigma_hat below 1e-14).
PodBasis pod(const SnapshotSet& s, const SparseMatrix& m, int n_rb, NormKind norm = NormKind::L2);

/// M-orthogonal projection of x onto span(basis.v).
Vector project(const PodBasis& basis, const SparseMatrix& m, const Vector& x);

/// Mean relative m-norm projection error of the snapshots onto the first N POD
/// modes, for N = 1..n_max (entry N-1).
std::vector<double> projection_errors(const PodBasis& basis, const SparseMatrix& m, const SnapshotSet& s, int n_max);

/// Supremizer columns: m s_k = b q_k for each column q_k of `dual`, then
/// m-orthonormalized against `primal` and each other. Columns that vanish
/// after orthogonalization are dropped. Constrained rows of m must already
/// be unit rows with zero right-hand side in b.
DenseMatrix supremizers(const SparseMatrix& m, const SparseMatrix& b, const DenseMatrix& dual,
                        const DenseMatrix& primal);

/// Offline settings: uniform N_rb with per-field overrides.
struct OfflineSettings {
  int n_rb = 16;
  std::map<std::string, int> n_rb_field;
  bool supremizers = true;

  int n_for(const std::string& field) const;
};

/// Supremizer pairs (dual field, primal field) enriched by default: pressure and
/// the velocity multiplier enrich u, the displacement multiplier enriches d_f.
std::vector<std::pair<std::string, std::string>> supremizer_pairs(const BlockLayout& layout);

/// PODs of every block of the training branch plus supremizer enrichment.
/// Coupling blocks are taken from the Jacobian at the zero state (reference
/// configuration) at mu_ref.
std::vector<PodBasis> build_bases(const Model& model, const std::vector<BranchRecord>& train,
                                  const std::vector<SparseMatrix>& norms, const OfflineSettings& settings,
                                  double mu_ref);

/// Smallest singular value of primal^T b dual (both bases orthonormal in their norms).
double reduced_inf_sup(const SparseMatrix& b, const DenseMatrix& primal, const DenseMatrix& dual);

/// Norm matrix of a block with constrained rows and columns replaced by unit vectors.
/// `kinds` maps block names to the inner product (default: H1 for u, d_f, d_s and L2 otherwise).
NormKind default_norm(const std::string& field);

/// Galerkin projection of a full-order model onto a block-diagonal basis.
/// The reduced residual is V^T F(V a) and the reduced Jacobian V^T J(V a) V.
class ReducedModel : public Model {
 public:
  /// `bases` holds one basis per block of the full layout, in layout order.
  /// `norms` are the matching block norm matrices (used for projections).
  ReducedModel(const Model& full, std::vector<PodBasis> bases, std::vector<SparseMatrix> norms);
  ~ReducedModel() override;

  const BlockLayout& layout() const override { return layout_; }
  void evaluate(const Vector& a, double mu, Vector* residual, Jacobian* jacobian) const override;
  void check_admissible(const Vector& a) const override { full_->check_admissible(lift(a)); }
  /// The full seed projected like a residual (V^T s).
  std::optional<Vector> antisymmetric_seed() const override;
  Outputs outputs(const Vector& a, double mu) const override { return full_->outputs(lift(a), mu); }
  std::string label() const override { return full_->label() + "-rb"; }

  const Model& full() const { return *full_; }
  const std::vector<PodBasis>& bases() const { return bases_; }
  const SparseMatrix& norm(std::size_t block) const { return norms_[block]; }
  Vector lift(const Vector& a) const;
  /// Block-wise M-orthogonal projection coefficients of a full state.
  Vector restrict(const Vector& x) const;

 private:
  const Model* full_;
  std::vector<PodBasis> bases_;
  std::vector<SparseMatrix> norms_;
  BlockLayout layout_;
  // Row-major copies of the bases and the block of every full row, for the Jacobian projection.
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> rows_;
  std::vector<int> row_block_;
  // Reduced blocks of the previous Jacobian, reused where its entries are unchanged.
  struct ProjectionCache;
  std::unique_ptr<ProjectionCache> cache_;
};

/// Per-field errors against a full-order branch.
struct FieldErrors {
  double proj = 0.0;  ///< mean relative projection error
  double rb = 0.0;    ///< mean relative reduced-solution error (NaN without reduced states)
};
using RomErrors = std::map<std::string, FieldErrors>;

/// Mean relative errors over matching mu grids. `reduced` may be empty.
RomErrors rom_errors(const ReducedModel& rom, const std::vector<BranchRecord>& full,
                     const std::vector<BranchRecord>& reduced);

/// Component-wise |x_h - x_rb| / ||x_h||_X of one field.
Vector pointwise_error(const Vector& xh, const Vector& xrb, const SparseMatrix& m);

/// Assembles the norm matrices of every block of a model with Dirichlet rows eliminated.
/// Supported models expose per-block spaces through `block_spaces`.
std::vector<SparseMatrix> block_norms(const std::vector<const FeSpace*>& spaces, const BlockLayout& layout,
                                      const std::vector<char>& dirichlet);

/// Basis persistence: one binary file per field plus a JSON manifest.
void write_basis(const std::filesystem::path& file, const PodBasis& basis);
PodBasis read_basis(const std::filesystem::path& file);

}  // namespace coanda
