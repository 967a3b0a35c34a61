#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "mcflow/io/collated.hpp"
#include "mcflow/io/read_strategy.hpp"

using namespace mcflow;

namespace {

// Ranges: strategy, rank count, simulated open latency in ms.
void BM_Read(benchmark::State& state) {
  const auto strategy = static_cast<ReadStrategy>(state.range(0));
  const int ranks = static_cast<int>(state.range(1));
  const auto path = (std::filesystem::temp_directory_path() / ("mcflow_bench_" + std::to_string(ranks))).string();
  std::mt19937_64 rng(1);
  std::vector<Payload> payloads(static_cast<std::size_t>(ranks), Payload(1 << 16));
  for (auto& p : payloads) {
    for (auto& b : p) b = static_cast<std::byte>(rng());
  }
  write_collated(path, "psi", DType::f64, payloads);
  const auto index = build_index(path);
  ReadOptions options;
  options.strategy = strategy;
  options.open_latency_ms = static_cast<double>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(read_with_strategy(path, index, ranks, options));
  state.SetLabel(to_string(strategy));
  std::filesystem::remove(path);
  std::filesystem::remove(index_path(path));
}
BENCHMARK(BM_Read)
    ->ArgsProduct({{0, 1, 2}, {16, 64}, {0, 5}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
