#include "mcflow/sparse/kernels.hpp"

#include <cmath>
#include <string>

#include "mcflow/common/error.hpp"

namespace mcflow {
namespace {

constexpr std::size_t kChunk = 4096;

struct RowCursor {
  const Label* offsets;
  std::size_t base;
};

void check_length(std::size_t got, Label want, const char* what) {
  if (got != static_cast<std::size_t>(want)) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                         std::to_string(want));
  }
}

// Calls body(r, cursors, count) for every row of block row i.
template <class Body>
void for_rows(const BlockCsrMatrix& a, Label i, Body&& body) {
  const auto members = a.blocks_in_row(i);
  RowCursor cur[64];
  std::vector<RowCursor> heap;
  RowCursor* c = cur;
  if (members.size() > 64) {
    heap.resize(members.size());
    c = heap.data();
  }
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto& b = a.blocks()[static_cast<std::size_t>(members[m])];
    c[m] = {b.row_offsets.data(), b.value_offset};
  }
  const CellRange rows = a.row_ranges()[i];
  for (Label r = rows.begin; r < rows.end; ++r) body(r, r - rows.begin, c, members.size());
}

void run_rows(const BlockCsrMatrix& a, ThreadPool* pool, const std::function<void(int)>& job) {
  for_each_worker(pool, a.threads(), job);
}

void check_diagonal(const BlockCsrMatrix& a) {
  for (Label r = 0; r < a.n_rows(); ++r) {
    if (a.diagonal(r) == 0.0) throw ZeroDiagonalError(r);
  }
}

}  // namespace

void spmv(const BlockCsrMatrix& a, std::span<const double> x, std::span<double> y, const KernelContext& ctx) {
  check_length(x.size(), a.n_rows(), "x");
  check_length(y.size(), a.n_rows(), "y");
  const double* vals = a.values().data();
  const Label* cols = a.columns().data();
  run_rows(a, ctx.pool, [&](int i) {
    for_rows(a, i, [&](Label r, Label lr, const RowCursor* c, std::size_t nb) {
      double acc = 0.0;
      for (std::size_t m = 0; m < nb; ++m) {
        const std::size_t b = c[m].base + static_cast<std::size_t>(c[m].offsets[lr]);
        const std::size_t e = c[m].base + static_cast<std::size_t>(c[m].offsets[lr + 1]);
        for (std::size_t k = b; k < e; ++k) acc += vals[k] * x[static_cast<std::size_t>(cols[k])];
      }
      y[static_cast<std::size_t>(r)] = acc;
    });
  });
  add_flops(ctx.flops, flop_count::spmv(a));
}

std::vector<double> spmv(const BlockCsrMatrix& a, std::span<const double> x, const KernelContext& ctx) {
  std::vector<double> y(static_cast<std::size_t>(a.n_rows()));
  spmv(a, x, y, ctx);
  return y;
}

void gauss_seidel_sweep(const BlockCsrMatrix& a, std::span<const double> b, std::span<double> x, int sweeps,
                        const KernelContext& ctx, SweepDirection direction) {
  check_length(b.size(), a.n_rows(), "b");
  check_length(x.size(), a.n_rows(), "x");
  if (sweeps < 0) throw DimensionError("sweep count must be non-negative");
  check_diagonal(a);
  const double* vals = a.values().data();
  const Label* cols = a.columns().data();
  const Label* dpos = a.diagonal_positions().data();
  const bool single = a.threads() == 1;
  std::vector<double> old(single ? 0 : x.size());

  auto pass = [&](bool backward) {
    if (!single) std::copy(x.begin(), x.end(), old.begin());
    run_rows(a, ctx.pool, [&](int i) {
      const CellRange own = a.row_ranges()[i];
      const auto members = a.blocks_in_row(i);
      auto update = [&](Label r) {
        const auto lr = static_cast<std::size_t>(r - own.begin);
        double acc = b[static_cast<std::size_t>(r)];
        for (Label id : members) {
          const auto& blk = a.blocks()[static_cast<std::size_t>(id)];
          const bool local = blk.col_block == i;
          const double* src = local || single ? x.data() : old.data();
          const std::size_t s = blk.value_offset + static_cast<std::size_t>(blk.row_offsets[lr]);
          const std::size_t e = blk.value_offset + static_cast<std::size_t>(blk.row_offsets[lr + 1]);
          for (std::size_t k = s; k < e; ++k) {
            if (cols[k] != r) acc -= vals[k] * src[static_cast<std::size_t>(cols[k])];
          }
        }
        x[static_cast<std::size_t>(r)] = acc / vals[static_cast<std::size_t>(dpos[r])];
      };
      if (backward) {
        for (Label r = own.end - 1; r >= own.begin; --r) update(r);
      } else {
        for (Label r = own.begin; r < own.end; ++r) update(r);
      }
    });
    add_flops(ctx.flops, flop_count::gs_pass(a));
  };

  for (int s = 0; s < sweeps; ++s) {
    pass(false);
    if (direction == SweepDirection::symmetric) pass(true);
  }
}

double residual_norm(const BlockCsrMatrix& a, std::span<const double> x, std::span<const double> b,
                     const KernelContext& ctx) {
  check_length(b.size(), a.n_rows(), "b");
  std::vector<double> r(b.size());
  spmv(a, x, r, ctx);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  add_flops(ctx.flops, r.size() + flop_count::vector_op(r.size()));
  return norm2(r, ctx.pool);
}

double dot(std::span<const double> x, std::span<const double> y, ThreadPool* pool) {
  if (x.size() != y.size()) throw DimensionError("dot operands differ in length");
  const std::size_t n = x.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  if (chunks <= 1 || pool == nullptr || pool->size() == 1) {
    double total = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
      double part = 0.0;
      const std::size_t e = std::min(n, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < e; ++i) part += x[i] * y[i];
      total += part;
    }
    return total;
  }
  std::vector<double> parts(chunks, 0.0);
  const auto w = static_cast<std::size_t>(pool->size());
  pool->run([&](int id) {
    for (std::size_t c = static_cast<std::size_t>(id); c < chunks; c += w) {
      double part = 0.0;
      const std::size_t e = std::min(n, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < e; ++i) part += x[i] * y[i];
      parts[c] = part;
    }
  });
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

double norm2(std::span<const double> x, ThreadPool* pool) { return std::sqrt(dot(x, x, pool)); }

}  // namespace mcflow
