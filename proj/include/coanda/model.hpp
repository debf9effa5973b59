#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coanda/linalg.hpp"

namespace coanda {

class FeSpace;

using Jacobian = std::variant<SparseMatrix, DenseMatrix>;
using Outputs = std::map<std::string, double>;

/// Discrete nonlinear system F(x; mu) = 0 in the continuation parameter mu.
class Model {
 public:
  virtual ~Model() = default;

  virtual const BlockLayout& layout() const = 0;
  std::size_t size() const { return layout().total(); }

  /// Residual and/or Jacobian at (x, mu); null outputs are skipped.
  virtual void evaluate(const Vector& x, double mu, Vector* residual, Jacobian* jacobian) const = 0;

  Vector residual(const Vector& x, double mu) const;
  SparseMatrix sparse_jacobian(const Vector& x, double mu) const;

  /// Throws MeshInversion when x is outside the model's admissible set.
  virtual void check_admissible(const Vector& /*x*/) const {}

  /// Mirror image of x about the channel midline, when the discretization allows it.
  virtual std::optional<Vector> reflect(const Vector& /*x*/) const { return std::nullopt; }

  /// Antisymmetric residual perturbation of unit amplitude used for branch
  /// selection (a nodal force on the velocity rows for the full models).
  virtual std::optional<Vector> antisymmetric_seed() const { return std::nullopt; }

  /// Scalar outputs of a state.
  virtual Outputs outputs(const Vector& x, double mu) const = 0;

  /// Finite element space of each block, in layout order (empty if not applicable).
  virtual std::vector<const FeSpace*> block_spaces() const { return {}; }
  /// Strongly constrained dofs (Dirichlet rows), or null.
  virtual const std::vector<char>* constrained() const { return nullptr; }

  /// Short label ("ns", "fsi-linear", ...).
  virtual std::string label() const = 0;
};

}  // namespace coanda
