#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace coanda {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised by the sparse factorization when a zero pivot is met.
class SingularMatrix : public Error {
 public:
  SingularMatrix(std::ptrdiff_t pivot, const std::string& what)
      : Error(what), pivot_(pivot) {}
  std::ptrdiff_t pivot() const noexcept { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

/// det(I + grad d_f) <= 0 somewhere in the fluid reference mesh.
class MeshInversion : public Error {
 public:
  MeshInversion(std::size_t cell, double jacobian)
      : Error("mesh inversion in cell " + std::to_string(cell) +
              " (J = " + std::to_string(jacobian) + ")"),
        cell_(cell),
        jacobian_(jacobian) {}
  std::size_t cell() const noexcept { return cell_; }
  double jacobian() const noexcept { return jacobian_; }

 private:
  std::size_t cell_;
  double jacobian_;
};

class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

}  // namespace coanda
