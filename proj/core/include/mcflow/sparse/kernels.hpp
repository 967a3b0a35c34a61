#pragma once

#include <span>
#include <vector>

#include "mcflow/common/thread_pool.hpp"
#include "mcflow/metrics/flops.hpp"
#include "mcflow/sparse/block_csr.hpp"

namespace mcflow {

/// Execution context shared by the sparse kernels. With a pool, block row i
/// is processed by worker i % pool->size(); without one, sequentially.
struct KernelContext {
  ThreadPool* pool = nullptr;
  FlopCounter* flops = nullptr;
};

/// y = A x. Every row is summed with one accumulator in ascending column
/// order, so the result does not depend on the block layout or worker count.
void spmv(const BlockCsrMatrix& a, std::span<const double> x, std::span<double> y, const KernelContext& ctx = {});
std::vector<double> spmv(const BlockCsrMatrix& a, std::span<const double> x, const KernelContext& ctx = {});

enum class SweepDirection { forward, symmetric };

/// Hybrid Gauss-Seidel: inside each diagonal block a Gauss-Seidel pass using
/// freshly updated values, across blocks the values from before the sweep.
/// A symmetric sweep is a forward pass followed by a backward pass.
/// Throws ZeroDiagonalError for the first row with a zero diagonal.
void gauss_seidel_sweep(const BlockCsrMatrix& a, std::span<const double> b, std::span<double> x, int sweeps,
                        const KernelContext& ctx = {}, SweepDirection direction = SweepDirection::forward);

/// ||b - A x||_2.
double residual_norm(const BlockCsrMatrix& a, std::span<const double> x, std::span<const double> b,
                     const KernelContext& ctx = {});

/// Dot product with a fixed chunked summation order (independent of workers).
double dot(std::span<const double> x, std::span<const double> y, ThreadPool* pool = nullptr);
double norm2(std::span<const double> x, ThreadPool* pool = nullptr);

/// Analytic operation counts used by the kernels.
namespace flop_count {
inline std::uint64_t spmv(const BlockCsrMatrix& a) { return 2 * static_cast<std::uint64_t>(a.nnz()); }
/// One forward or backward pass: per row (len - 1) multiply-subtract pairs and one division.
inline std::uint64_t gs_pass(const BlockCsrMatrix& a) {
  return 2 * static_cast<std::uint64_t>(a.nnz()) - static_cast<std::uint64_t>(a.n_rows());
}
inline std::uint64_t vector_op(std::size_t n) { return 2 * static_cast<std::uint64_t>(n); }
}  // namespace flop_count

}  // namespace mcflow
