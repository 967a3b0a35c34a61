#include <benchmark/benchmark.h>

#include "mcflow/common/thread_pool.hpp"
#include "mcflow/sparse/kernels.hpp"
#include "mcflow/sparse/solvers.hpp"
#include "support/fixtures.hpp"

using namespace mcflow;

namespace {

struct Setup {
  test::Problem problem;
  BlockSystem system;
  std::vector<double> x, y;

  Setup(int n, Label threads) : problem(test::laplacian_problem(n, threads)) {
    system = build_block_map(problem.mesh, problem.partition);
    refresh_values(problem.system.matrix, system.map, system.matrix);
    x = test::random_vector(static_cast<std::size_t>(problem.mesh.n_cells()), 1);
    y.resize(x.size());
  }
};

void BM_Spmv(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), static_cast<Label>(state.range(1)));
  ThreadPool pool(static_cast<int>(state.range(1)));
  const KernelContext ctx{&pool, nullptr};
  for (auto _ : state) {
    spmv(s.system.matrix, s.x, s.y, ctx);
    benchmark::DoNotOptimize(s.y.data());
  }
  state.counters["flops"] = benchmark::Counter(static_cast<double>(flop_count::spmv(s.system.matrix)),
                                               benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Spmv)->Args({16, 1})->Args({32, 1})->Args({32, 4});

void BM_Refresh(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), static_cast<Label>(state.range(1)));
  for (auto _ : state) {
    refresh_values(s.problem.system.matrix, s.system.map, s.system.matrix);
    benchmark::DoNotOptimize(s.system.matrix.values().data());
  }
}
BENCHMARK(BM_Refresh)->Args({16, 1})->Args({32, 1})->Args({32, 4});

void BM_GaussSeidel(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), static_cast<Label>(state.range(1)));
  ThreadPool pool(static_cast<int>(state.range(1)));
  const KernelContext ctx{&pool, nullptr};
  std::vector<double> x(s.x.size(), 0.0);
  for (auto _ : state) gauss_seidel_sweep(s.system.matrix, s.x, x, 1, ctx);
}
BENCHMARK(BM_GaussSeidel)->Args({32, 1})->Args({32, 4});

void BM_Pcg(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    std::vector<double> x(s.x.size(), 0.0);
    benchmark::DoNotOptimize(pcg_solve(s.system.matrix, s.x, x, {1e-8, 1000, Preconditioner::diagonal()}));
  }
}
BENCHMARK(BM_Pcg)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
