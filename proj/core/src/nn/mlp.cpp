#include "mcflow/nn/mlp.hpp"

#include <cmath>
#include <random>

#include "mcflow/common/error.hpp"
#include "mcflow/nn/half.hpp"

namespace mcflow {

std::string to_string(Precision p) { return p == Precision::fp32 ? "fp32" : "mixed_fp16"; }
std::string to_string(Activation a) { return a == Activation::gelu_exact ? "exact" : "table"; }

Precision parse_precision(const std::string& text) {
  if (text == "fp32") return Precision::fp32;
  if (text == "fp16" || text == "mixed_fp16" || text == "mixed") return Precision::mixed_fp16;
  throw ConfigError("unknown precision '" + text + "'");
}

Activation parse_activation(const std::string& text) {
  if (text == "exact" || text == "gelu_exact") return Activation::gelu_exact;
  if (text == "table" || text == "gelu_table") return Activation::gelu_table;
  throw ConfigError("unknown activation '" + text + "'");
}

MlpModel::MlpModel(std::vector<std::uint32_t> dims, Precision precision, Activation activation)
    : dims_(std::move(dims)), precision_(precision), activation_(activation) {
  if (dims_.size() < 2) throw DimensionError("a model needs at least one layer");
  for (auto d : dims_) {
    if (d == 0) throw DimensionError("layer widths must be positive");
  }
  mean_.assign(dims_.front(), 0.0f);
  stddev_.assign(dims_.front(), 1.0f);
  const std::size_t layers = dims_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t w = static_cast<std::size_t>(dims_[l]) * dims_[l + 1];
    if (precision_ == Precision::fp32) {
      w32_.emplace_back(w, 0.0f);
      b32_.emplace_back(dims_[l + 1], 0.0f);
    } else {
      w16_.emplace_back(w, std::uint16_t{0});
      b16_.emplace_back(dims_[l + 1], std::uint16_t{0});
    }
  }
}

MlpModel MlpModel::random(std::vector<std::uint32_t> dims, std::uint64_t seed, Precision precision,
                          Activation activation) {
  MlpModel m(std::move(dims), precision, activation);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> mean_dist(-1.0f, 1.0f);
  std::uniform_real_distribution<float> std_dist(0.5f, 2.0f);
  std::vector<float> mean(m.input_width()), sd(m.input_width());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] = mean_dist(rng);
    sd[i] = std_dist(rng);
  }
  m.set_normalization(std::move(mean), std::move(sd));
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const std::uint32_t in = m.dims_[l], out = m.dims_[l + 1];
    std::normal_distribution<float> wd(0.0f, std::sqrt(2.0f / static_cast<float>(in)));
    std::normal_distribution<float> bd(0.0f, 0.01f);
    std::vector<float> w(static_cast<std::size_t>(in) * out), b(out);
    for (auto& v : w) v = wd(rng);
    for (auto& v : b) v = bd(rng);
    m.set_layer(l, w, b);
  }
  return m;
}

void MlpModel::set_normalization(std::vector<float> mean, std::vector<float> stddev) {
  if (mean.size() != input_width() || stddev.size() != input_width()) {
    throw DimensionError("normalisation statistics must match the input width");
  }
  for (float s : stddev) {
    if (!(s > 0.0f) || !std::isfinite(s)) throw DomainError("standard deviations must be positive and finite");
  }
  for (float m : mean) {
    if (!std::isfinite(m)) throw DomainError("means must be finite");
  }
  mean_ = std::move(mean);
  stddev_ = std::move(stddev);
}

std::vector<float> MlpModel::weights(std::size_t layer) const {
  if (precision_ == Precision::fp32) return w32_.at(layer);
  std::vector<float> out(w16_.at(layer).size());
  half_to_float(w16_[layer], out);
  return out;
}

std::vector<float> MlpModel::bias(std::size_t layer) const {
  if (precision_ == Precision::fp32) return b32_.at(layer);
  std::vector<float> out(b16_.at(layer).size());
  half_to_float(b16_[layer], out);
  return out;
}

void MlpModel::set_layer(std::size_t layer, std::span<const float> weights, std::span<const float> bias) {
  if (layer >= layer_count()) throw DimensionError("layer index out of range");
  const std::size_t in = dims_[layer], out = dims_[layer + 1];
  if (weights.size() != in * out || bias.size() != out) throw DimensionError("layer shape mismatch");
  if (precision_ == Precision::fp32) {
    w32_[layer].assign(weights.begin(), weights.end());
    b32_[layer].assign(bias.begin(), bias.end());
  } else {
    float_to_half(weights, w16_[layer]);
    float_to_half(bias, b16_[layer]);
  }
}

void MlpModel::set_layer_f16(std::size_t layer, std::span<const std::uint16_t> weights,
                             std::span<const std::uint16_t> bias) {
  if (precision_ != Precision::mixed_fp16) throw DimensionError("raw binary16 layers need a mixed_fp16 model");
  if (layer >= layer_count()) throw DimensionError("layer index out of range");
  const std::size_t in = dims_[layer], out = dims_[layer + 1];
  if (weights.size() != in * out || bias.size() != out) throw DimensionError("layer shape mismatch");
  w16_[layer].assign(weights.begin(), weights.end());
  b16_[layer].assign(bias.begin(), bias.end());
}

MlpModel MlpModel::converted(Precision precision) const {
  if (precision == precision_) return *this;
  MlpModel m(dims_, precision, activation_);
  m.mean_ = mean_;
  m.stddev_ = stddev_;
  for (std::size_t l = 0; l < layer_count(); ++l) m.set_layer(l, weights(l), bias(l));
  return m;
}

std::uint64_t MlpModel::parameter_count() const noexcept {
  std::uint64_t n = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) n += static_cast<std::uint64_t>(dims_[l] + 1) * dims_[l + 1];
  return n;
}

std::uint64_t MlpModel::flops_per_sample() const noexcept {
  std::uint64_t n = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) n += 2ull * dims_[l] * dims_[l + 1];
  return n;
}

std::vector<float> zscore(const MlpModel& model, std::span<const float> inputs) {
  const std::size_t w = model.input_width();
  if (inputs.size() % w != 0) throw DimensionError("input length is not a multiple of the input width");
  std::vector<float> out(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::size_t j = i % w;
    out[i] = (inputs[i] - model.mean()[j]) / model.stddev()[j];
  }
  return out;
}

}  // namespace mcflow
