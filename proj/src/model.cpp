#include "coanda/model.hpp"

#include "coanda/error.hpp"

namespace coanda {

Vector Model::residual(const Vector& x, double mu) const {
  Vector f;
  evaluate(x, mu, &f, nullptr);
  return f;
}

SparseMatrix Model::sparse_jacobian(const Vector& x, double mu) const {
  Jacobian j;
  evaluate(x, mu, nullptr, &j);
  if (auto* s = std::get_if<SparseMatrix>(&j)) return std::move(*s);
  return std::get<DenseMatrix>(j).sparseView();
}

}  // namespace coanda
