#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coanda/error.hpp"
#include "coanda/model.hpp"

namespace coanda {

struct NewtonSettings {
  double tol_residual = 1e-9;  ///< absolute, Euclidean norm of F
  double tol_step = 0.0;       ///< 0 disables the step criterion
  int max_iter = 20;
  bool line_search = true;
  bool admissibility_guard = true;
  /// Replace every iterate by its mirror-symmetric part (needs Model::reflect).
  bool symmetrize = false;

  void validate() const;
};

struct NewtonResult {
  Vector x;
  std::vector<double> history;  ///< residual norm before the first and after every step
  int iterations = 0;
};

/// Reusable linear-solver state (keeps the symbolic sparse factorization).
class NewtonWorkspace {
 public:
  NewtonWorkspace();
  ~NewtonWorkspace();
  NewtonWorkspace(const NewtonWorkspace&) = delete;
  NewtonWorkspace& operator=(const NewtonWorkspace&) = delete;

  Vector solve(const Jacobian& j, const Vector& rhs);

 private:
  SparseLu lu_;
};

/// Newton's method with optional step halving. Throws NonConvergence
/// (carrying the residual history) or SingularMatrix.
NewtonResult newton_solve(const Model& model, const Vector& x0, double mu, const NewtonSettings& settings,
                          NewtonWorkspace* workspace = nullptr);

/// Observed convergence order from the last three residuals of a history.
/// Entries at or below `floor` (round-off stagnation) are ignored.
double observed_order(const std::vector<double>& history, double floor = 0.0);

enum class InitialGuess { Zero, Provided, PerturbedZero };
enum class Side { Upper, Lower };

struct BranchSpec {
  std::vector<double> mu;
  InitialGuess guess = InitialGuess::Zero;
  Vector provided;
  /// Strength of the antisymmetric forcing used for branch selection (signed:
  /// positive selects the upper side). While seeding, every point first solves
  /// F(x) = amplitude * seed by continuation and then F(x) = 0 from that state.
  double amplitude = 0.0;
  /// Seeding stops once |u_y| / U of the unforced state exceeds this ratio.
  double seed_until = 1e-3;
  std::string label = "custom";
  bool symmetrize = false;
  int max_bisections = 4;

  void validate() const;
};

struct BranchRecord {
  double mu = 0.0;
  Vector state;
  int iterations = 0;
  Outputs outputs;
};

struct Branch {
  std::string label;
  std::string model;
  std::vector<BranchRecord> records;
};

class PartialBranch : public Error {
 public:
  PartialBranch(const std::string& what, Branch branch, std::exception_ptr cause)
      : Error(what), branch_(std::move(branch)), cause_(std::move(cause)) {}
  const Branch& branch() const noexcept { return branch_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  Branch branch_;
  std::exception_ptr cause_;
};

/// Called after every converged list point.
using SweepObserver = std::function<void(const BranchRecord&)>;

/// Branch-wise continuation: point j is seeded with the state of point j-1.
/// A failed step is retried through up to max_bisections levels of local
/// parameter halving; exhaustion throws PartialBranch.
Branch continuation_sweep(const Model& model, const BranchSpec& spec, const NewtonSettings& settings,
                          const SweepObserver& observer = {});

/// Sets a perturbed-zero guess with the forcing sign of the requested side.
BranchSpec select_branch_side(BranchSpec spec, Side side, double amplitude);

/// Pitchfork onset from an asymmetric branch: u_y^2 is fitted linearly in mu
/// over the first `n_fit` records (in sweep order) with |u_y| > ratio * U, and
/// the root of the fit is returned. Empty when fewer than two records qualify.
std::optional<double> estimate_onset(const Branch& branch, double ratio = 1e-3, int n_fit = 3);

/// Equispaced list from `from` to `to` (inclusive).
std::vector<double> linspace(double from, double to, int n);

}  // namespace coanda
