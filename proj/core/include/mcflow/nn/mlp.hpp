#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mcflow/common/thread_pool.hpp"

namespace mcflow {

enum class Precision : std::uint8_t { fp32 = 0, mixed_fp16 = 1 };
enum class Activation : std::uint8_t { gelu_exact = 0, gelu_table = 1 };

std::string to_string(Precision p);
std::string to_string(Activation a);
Precision parse_precision(const std::string& text);
Activation parse_activation(const std::string& text);

/// Fully connected network with GeLU between layers and none after the last.
///
/// In fp32 mode weights are single precision. In mixed_fp16 mode weights and
/// biases are binary16; products accumulate in fp32, activations are rounded
/// to binary16 between layers, and the tabulated GeLU uses fp16 coefficients.
class MlpModel {
 public:
  MlpModel() = default;
  /// Zero weights, zero mean and unit standard deviation.
  MlpModel(std::vector<std::uint32_t> dims, Precision precision = Precision::fp32,
           Activation activation = Activation::gelu_table);

  /// He-style N(0, 2 / fan_in) weights, small biases, and normalisation
  /// statistics drawn from fixed ranges; deterministic for a seed.
  static MlpModel random(std::vector<std::uint32_t> dims, std::uint64_t seed, Precision precision = Precision::fp32,
                         Activation activation = Activation::gelu_table);

  [[nodiscard]] std::span<const std::uint32_t> dims() const noexcept { return dims_; }
  [[nodiscard]] std::size_t layer_count() const noexcept { return dims_.empty() ? 0 : dims_.size() - 1; }
  [[nodiscard]] std::uint32_t input_width() const { return dims_.front(); }
  [[nodiscard]] std::uint32_t output_width() const { return dims_.back(); }
  [[nodiscard]] Precision precision() const noexcept { return precision_; }
  [[nodiscard]] Activation activation() const noexcept { return activation_; }
  void set_activation(Activation a) noexcept { activation_ = a; }

  [[nodiscard]] std::span<const float> mean() const noexcept { return mean_; }
  [[nodiscard]] std::span<const float> stddev() const noexcept { return stddev_; }
  void set_normalization(std::vector<float> mean, std::vector<float> stddev);

  /// Layer l weights, out x in row-major, as fp32 values (decoded in fp16 mode).
  [[nodiscard]] std::vector<float> weights(std::size_t layer) const;
  [[nodiscard]] std::vector<float> bias(std::size_t layer) const;
  /// Sets layer values; rounded to binary16 in mixed_fp16 mode.
  void set_layer(std::size_t layer, std::span<const float> weights, std::span<const float> bias);
  /// Sets raw binary16 values of a mixed_fp16 model.
  void set_layer_f16(std::size_t layer, std::span<const std::uint16_t> weights, std::span<const std::uint16_t> bias);

  /// Raw storage: fp32 arrays in fp32 mode, binary16 bits in mixed_fp16 mode.
  [[nodiscard]] std::span<const float> weights_f32(std::size_t layer) const { return w32_.at(layer); }
  [[nodiscard]] std::span<const float> bias_f32(std::size_t layer) const { return b32_.at(layer); }
  [[nodiscard]] std::span<const std::uint16_t> weights_f16(std::size_t layer) const { return w16_.at(layer); }
  [[nodiscard]] std::span<const std::uint16_t> bias_f16(std::size_t layer) const { return b16_.at(layer); }

  /// Copy of the model in another precision (weights rounded or widened).
  [[nodiscard]] MlpModel converted(Precision precision) const;

  [[nodiscard]] std::uint64_t parameter_count() const noexcept;
  /// Sum over layers of 2 * in * out.
  [[nodiscard]] std::uint64_t flops_per_sample() const noexcept;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

 private:
  std::vector<std::uint32_t> dims_;
  Precision precision_ = Precision::fp32;
  Activation activation_ = Activation::gelu_table;
  std::vector<float> mean_;
  std::vector<float> stddev_;
  std::vector<std::vector<float>> w32_;
  std::vector<std::vector<float>> b32_;
  std::vector<std::vector<std::uint16_t>> w16_;
  std::vector<std::vector<std::uint16_t>> b16_;
};

/// Z-score (x - mean) / stddev of a row-major batch, in fp32.
std::vector<float> zscore(const MlpModel& model, std::span<const float> inputs);

struct InferOptions {
  ThreadPool* pool = nullptr;
};

/// Runs the network on `batch` samples stored row-major in `inputs`
/// (batch x input_width) and returns batch x output_width values. Each sample
/// goes through the same instruction sequence regardless of batch size or
/// position, so results are bitwise independent of batching.
std::vector<float> infer(const MlpModel& model, std::span<const float> inputs, std::size_t batch,
                         const InferOptions& options = {});

}  // namespace mcflow
