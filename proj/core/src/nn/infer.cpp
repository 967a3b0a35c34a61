#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "mcflow/common/error.hpp"
#include "mcflow/nn/gelu.hpp"
#include "mcflow/nn/half.hpp"
#include "mcflow/nn/mlp.hpp"

namespace mcflow {
namespace {

// Samples are processed in tiles of kLanes, stored feature-major inside a
// tile, so every output row is a lane-parallel multiply-add over features.
constexpr std::size_t kLanes = 16;
constexpr std::size_t kRows = 4;
constexpr std::size_t kTilesPerChunk = 16;

typedef float Lanes __attribute__((vector_size(kLanes * sizeof(float))));

inline Lanes load(const float* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store(float* p, Lanes v) { std::memcpy(p, &v, sizeof v); }

void dense_layer(const MlpModel& m, std::size_t layer, const float* x, float* y, std::size_t tiles,
                 std::vector<float>& wbuf) {
  const std::size_t in = m.dims()[layer];
  const std::size_t out = m.dims()[layer + 1];
  const bool half = m.precision() == Precision::mixed_fp16;
  wbuf.resize(kRows * in);
  float bias[kRows];
  for (std::size_t ob = 0; ob < out; ob += kRows) {
    const std::size_t rows = std::min(kRows, out - ob);
    if (half) {
      half_to_float(m.weights_f16(layer).subspan(ob * in, rows * in), std::span<float>(wbuf).first(rows * in));
      for (std::size_t r = 0; r < rows; ++r) bias[r] = half_to_float(m.bias_f16(layer)[ob + r]);
    } else {
      const auto w = m.weights_f32(layer).subspan(ob * in, rows * in);
      std::copy(w.begin(), w.end(), wbuf.begin());
      for (std::size_t r = 0; r < rows; ++r) bias[r] = m.bias_f32(layer)[ob + r];
    }
    // Padding rows run the same code with zero weights and are discarded.
    std::fill(wbuf.begin() + static_cast<std::ptrdiff_t>(rows * in), wbuf.end(), 0.0f);
    for (std::size_t r = rows; r < kRows; ++r) bias[r] = 0.0f;
    const float* w0 = wbuf.data();
    const float* w1 = w0 + in;
    const float* w2 = w1 + in;
    const float* w3 = w2 + in;
    for (std::size_t t = 0; t < tiles; ++t) {
      const float* xt = x + t * in * kLanes;
      Lanes a0 = Lanes{} + bias[0];
      Lanes a1 = Lanes{} + bias[1];
      Lanes a2 = Lanes{} + bias[2];
      Lanes a3 = Lanes{} + bias[3];
      for (std::size_t i = 0; i < in; ++i) {
        const Lanes xv = load(xt + i * kLanes);
        a0 += w0[i] * xv;
        a1 += w1[i] * xv;
        a2 += w2[i] * xv;
        a3 += w3[i] * xv;
      }
      float* yt = y + (t * out + ob) * kLanes;
      store(yt, a0);
      if (rows > 1) store(yt + kLanes, a1);
      if (rows > 2) store(yt + 2 * kLanes, a2);
      if (rows > 3) store(yt + 3 * kLanes, a3);
    }
  }
}

void activate(const MlpModel& m, std::span<float> v) {
  const bool half = m.precision() == Precision::mixed_fp16;
  if (half) round_to_half(v);
  if (m.activation() == Activation::gelu_table) {
    gelu_table(half ? CoefficientPrecision::fp16 : CoefficientPrecision::fp32).apply(v);
  } else {
    for (auto& x : v) x = static_cast<float>(gelu_exact(x));
  }
  if (half) round_to_half(v);
}

void run_chunk(const MlpModel& m, std::span<const float> inputs, std::size_t first, std::size_t count,
               std::span<float> outputs) {
  const std::size_t in = m.input_width();
  const std::size_t out_w = m.output_width();
  const std::size_t tiles = (count + kLanes - 1) / kLanes;
  std::size_t widest = 0;
  for (auto d : m.dims()) widest = std::max<std::size_t>(widest, d);
  std::vector<float> a(tiles * widest * kLanes, 0.0f), b(tiles * widest * kLanes, 0.0f), wbuf;

  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t t = s / kLanes, lane = s % kLanes;
    for (std::size_t j = 0; j < in; ++j) {
      a[(t * in + j) * kLanes + lane] = (inputs[(first + s) * in + j] - m.mean()[j]) / m.stddev()[j];
    }
  }
  if (m.precision() == Precision::mixed_fp16) round_to_half(std::span<float>(a).first(tiles * in * kLanes));

  float* x = a.data();
  float* y = b.data();
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    dense_layer(m, l, x, y, tiles, wbuf);
    const std::size_t n = tiles * m.dims()[l + 1] * kLanes;
    if (l + 1 < m.layer_count()) {
      activate(m, std::span<float>(y, n));
    } else if (m.precision() == Precision::mixed_fp16) {
      round_to_half(std::span<float>(y, n));
    }
    std::swap(x, y);
  }
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t t = s / kLanes, lane = s % kLanes;
    for (std::size_t o = 0; o < out_w; ++o) outputs[(first + s) * out_w + o] = x[(t * out_w + o) * kLanes + lane];
  }
}

}  // namespace

std::vector<float> infer(const MlpModel& model, std::span<const float> inputs, std::size_t batch,
                         const InferOptions& options) {
  if (model.layer_count() == 0) throw DimensionError("empty model");
  const std::size_t in = model.input_width();
  if (inputs.size() != batch * in) {
    throw DimensionError("expected " + std::to_string(batch) + " x " + std::to_string(in) + " inputs, got " +
                         std::to_string(inputs.size()));
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::isfinite(inputs[i])) throw DomainError("non-finite input in sample " + std::to_string(i / in));
  }
  std::vector<float> outputs(batch * model.output_width());
  const std::size_t per_chunk = kLanes * kTilesPerChunk;
  const std::size_t chunks = (batch + per_chunk - 1) / per_chunk;
  for_each_worker(options.pool, static_cast<int>(chunks), [&](int c) {
    const std::size_t first = static_cast<std::size_t>(c) * per_chunk;
    run_chunk(model, inputs, first, std::min(per_chunk, batch - first), outputs);
  });
  return outputs;
}

}  // namespace mcflow
