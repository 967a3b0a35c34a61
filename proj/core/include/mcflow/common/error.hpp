#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mcflow {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent mesh topology.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// A cell whose computed volume is not strictly positive.
class DegenerateCellError : public MeshError {
 public:
  DegenerateCellError(std::int64_t cell, double volume);
  [[nodiscard]] std::int64_t cell() const noexcept { return cell_; }

 private:
  std::int64_t cell_;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

/// Shape or size mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A conversion map used against a matrix with a different sparsity pattern.
class StaleMapError : public Error {
 public:
  using Error::Error;
};

/// Zero diagonal coefficient encountered by a smoother or preconditioner.
class ZeroDiagonalError : public Error {
 public:
  explicit ZeroDiagonalError(std::int64_t row);
  [[nodiscard]] std::int64_t row() const noexcept { return row_; }

 private:
  std::int64_t row_;
};

/// Non-finite values or breakdown inside an iterative solver.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Bad file contents: wrong magic, version, truncation, inconsistent index.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Operating system level I/O failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation (for example non-finite input).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid user supplied argument or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcflow
