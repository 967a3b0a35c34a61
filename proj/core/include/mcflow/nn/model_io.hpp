#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mcflow/nn/mlp.hpp"

namespace mcflow {

/// Model file, little-endian:
///   "MCNN" | u32 version (1) | u8 precision | u8 activation | u32 layer count L
///   | u32 dims[L + 1] | f32 mean[in] | f32 stddev[in]
///   | per layer: weights (out x in, row-major) then bias, as f32 or binary16.
std::vector<std::byte> serialize_model(const MlpModel& model);
MlpModel deserialize_model(std::span<const std::byte> bytes, const std::string& what = "model");

void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace mcflow
