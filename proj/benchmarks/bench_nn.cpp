#include <benchmark/benchmark.h>

#include <random>

#include "mcflow/nn/gelu.hpp"
#include "mcflow/nn/mlp.hpp"

using namespace mcflow;

namespace {

std::vector<float> uniform_inputs(std::size_t n, float lo, float hi) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_GeluTable(benchmark::State& state) {
  const auto& table = gelu_table(state.range(0) ? CoefficientPrecision::fp16 : CoefficientPrecision::fp32);
  const auto src = uniform_inputs(1 << 16, -4.0f, 4.0f);
  std::vector<float> v(src.size());
  for (auto _ : state) {
    v = src;
    table.apply(v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_GeluTable)->Arg(0)->Arg(1);

void BM_GeluExact(benchmark::State& state) {
  const auto src = uniform_inputs(1 << 16, -4.0f, 4.0f);
  std::vector<double> in(src.begin(), src.end()), out(in.size());
  for (auto _ : state) {
    gelu_exact(in, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(in.size()));
}
BENCHMARK(BM_GeluExact);

void BM_Infer(benchmark::State& state) {
  const auto precision = state.range(0) ? Precision::mixed_fp16 : Precision::fp32;
  const auto model = MlpModel::random({20, 256, 512, 256, 128, 17}, 1, precision);
  const auto batch = static_cast<std::size_t>(state.range(1));
  const auto x = uniform_inputs(batch * model.input_width(), -1.0f, 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(infer(model, x, batch));
  state.counters["flops"] = benchmark::Counter(static_cast<double>(model.flops_per_sample() * batch),
                                               benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Infer)->Args({0, 1024})->Args({1, 1024})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
