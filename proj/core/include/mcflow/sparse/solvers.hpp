#pragma once

#include <span>
#include <string>
#include <vector>

#include "mcflow/sparse/kernels.hpp"

namespace mcflow {

struct Preconditioner {
  enum class Kind { none, diagonal, gs_sweeps };
  Kind kind = Kind::diagonal;
  /// Symmetric hybrid Gauss-Seidel sweeps applied from a zero guess.
  int sweeps = 1;

  static Preconditioner none() { return {Kind::none, 0}; }
  static Preconditioner diagonal() { return {Kind::diagonal, 0}; }
  static Preconditioner gs(int k = 1) { return {Kind::gs_sweeps, k}; }
  /// Parses "none", "diagonal" / "jacobi", "gs" or "gs:<k>".
  static Preconditioner parse(const std::string& text);
};

std::string to_string(const Preconditioner& p);

struct SolverOptions {
  /// Relative to ||b||; absolute when b is zero.
  double tolerance = 1e-8;
  int max_iterations = 1000;
  Preconditioner preconditioner = Preconditioner::diagonal();
};

struct SolveResult {
  int iterations = 0;
  /// ||r|| / ||b|| at exit (||r|| when b is zero).
  double residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for symmetric positive definite A.
/// Starts from the contents of x. Reaching max_iterations is reported through
/// `converged`, non-finite iterates or breakdown raise DivergenceError.
SolveResult pcg_solve(const BlockCsrMatrix& a, std::span<const double> b, std::span<double> x,
                      const SolverOptions& options = {}, const KernelContext& ctx = {});

/// Repeated forward hybrid Gauss-Seidel sweeps until the relative residual
/// drops below the tolerance. Suitable for diagonally dominant non-symmetric
/// systems. Non-finite iterates raise DivergenceError.
SolveResult gs_solve(const BlockCsrMatrix& a, std::span<const double> b, std::span<double> x,
                     const SolverOptions& options = {}, const KernelContext& ctx = {});

/// Operation count of one preconditioner application.
std::uint64_t preconditioner_flops(const BlockCsrMatrix& a, const Preconditioner& p);

}  // namespace mcflow
