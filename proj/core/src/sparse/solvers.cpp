#include "mcflow/sparse/solvers.hpp"

#include <cmath>

#include "mcflow/common/error.hpp"

namespace mcflow {
namespace {

void apply_preconditioner(const BlockCsrMatrix& a, const Preconditioner& p, std::span<const double> r,
                          std::span<double> z, const KernelContext& ctx) {
  switch (p.kind) {
    case Preconditioner::Kind::none:
      std::copy(r.begin(), r.end(), z.begin());
      break;
    case Preconditioner::Kind::diagonal:
      for (Label i = 0; i < a.n_rows(); ++i) z[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)] / a.diagonal(i);
      add_flops(ctx.flops, static_cast<std::uint64_t>(a.n_rows()));
      break;
    case Preconditioner::Kind::gs_sweeps:
      std::fill(z.begin(), z.end(), 0.0);
      gauss_seidel_sweep(a, r, z, p.sweeps, ctx, SweepDirection::symmetric);
      break;
  }
}

void check_finite(double v, const char* what, int iteration) {
  if (!std::isfinite(v)) {
    throw DivergenceError(std::string("non-finite ") + what + " at iteration " + std::to_string(iteration));
  }
}

}  // namespace

Preconditioner Preconditioner::parse(const std::string& text) {
  if (text == "none") return none();
  if (text == "diagonal" || text == "jacobi") return diagonal();
  if (text == "gs") return gs(1);
  if (text.rfind("gs:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(text.substr(3), &used);
      if (k >= 1 && used == text.size() - 3) return gs(k);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown preconditioner '" + text + "'");
}

std::string to_string(const Preconditioner& p) {
  switch (p.kind) {
    case Preconditioner::Kind::none:
      return "none";
    case Preconditioner::Kind::diagonal:
      return "diagonal";
    case Preconditioner::Kind::gs_sweeps:
      return "gs:" + std::to_string(p.sweeps);
  }
  return "?";
}

std::uint64_t preconditioner_flops(const BlockCsrMatrix& a, const Preconditioner& p) {
  switch (p.kind) {
    case Preconditioner::Kind::none:
      return 0;
    case Preconditioner::Kind::diagonal:
      return static_cast<std::uint64_t>(a.n_rows());
    case Preconditioner::Kind::gs_sweeps:
      return 2 * static_cast<std::uint64_t>(p.sweeps) * flop_count::gs_pass(a);
  }
  return 0;
}

SolveResult pcg_solve(const BlockCsrMatrix& a, std::span<const double> b, std::span<double> x,
                      const SolverOptions& options, const KernelContext& ctx) {
  const auto n = static_cast<std::size_t>(a.n_rows());
  if (b.size() != n || x.size() != n) throw DimensionError("pcg operand length mismatch");
  if (!(options.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (options.preconditioner.kind != Preconditioner::Kind::none) {
    for (Label i = 0; i < a.n_rows(); ++i) {
      if (a.diagonal(i) == 0.0) throw ZeroDiagonalError(i);
    }
  }
  const auto vop = flop_count::vector_op(n);
  std::vector<double> r(n), z(n), p(n), q(n);

  spmv(a, x, r, ctx);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  add_flops(ctx.flops, n);

  const double bnorm = norm2(b, ctx.pool);
  double rnorm = norm2(r, ctx.pool);
  add_flops(ctx.flops, 2 * vop);
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  const double target = options.tolerance * scale;
  check_finite(rnorm, "residual", 0);

  SolveResult result;
  result.residual = rnorm / scale;
  if (rnorm <= target) {
    result.converged = true;
    return result;
  }

  apply_preconditioner(a, options.preconditioner, r, z, ctx);
  std::copy(z.begin(), z.end(), p.begin());
  double rz = dot(r, z, ctx.pool);
  add_flops(ctx.flops, vop);

  for (int it = 1; it <= options.max_iterations; ++it) {
    spmv(a, p, q, ctx);
    const double pq = dot(p, q, ctx.pool);
    add_flops(ctx.flops, vop);
    check_finite(pq, "curvature", it);
    if (pq <= 0.0) throw DivergenceError("non-positive curvature at iteration " + std::to_string(it));
    const double alpha = rz / pq;
    add_flops(ctx.flops, 1);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    add_flops(ctx.flops, 2 * vop);
    rnorm = norm2(r, ctx.pool);
    add_flops(ctx.flops, vop);
    check_finite(rnorm, "residual", it);
    result.iterations = it;
    result.residual = rnorm / scale;
    if (rnorm <= target) {
      result.converged = true;
      return result;
    }
    apply_preconditioner(a, options.preconditioner, r, z, ctx);
    const double rz_new = dot(r, z, ctx.pool);
    add_flops(ctx.flops, vop);
    check_finite(rz_new, "preconditioned residual", it);
    const double beta = rz_new / rz;
    add_flops(ctx.flops, 1);
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    add_flops(ctx.flops, vop);
  }
  return result;
}

SolveResult gs_solve(const BlockCsrMatrix& a, std::span<const double> b, std::span<double> x,
                     const SolverOptions& options, const KernelContext& ctx) {
  const auto n = static_cast<std::size_t>(a.n_rows());
  if (b.size() != n || x.size() != n) throw DimensionError("gs_solve operand length mismatch");
  if (!(options.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  const double bnorm = norm2(b, ctx.pool);
  add_flops(ctx.flops, flop_count::vector_op(n));
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  SolveResult result;
  double rnorm = residual_norm(a, x, b, ctx);
  check_finite(rnorm, "residual", 0);
  result.residual = rnorm / scale;
  if (result.residual <= options.tolerance) {
    result.converged = true;
    return result;
  }
  for (int it = 1; it <= options.max_iterations; ++it) {
    gauss_seidel_sweep(a, b, x, 1, ctx);
    rnorm = residual_norm(a, x, b, ctx);
    check_finite(rnorm, "residual", it);
    result.iterations = it;
    result.residual = rnorm / scale;
    if (result.residual <= options.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace mcflow
