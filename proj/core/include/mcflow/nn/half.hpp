#pragma once

#include <cstdint>
#include <span>

namespace mcflow {

/// IEEE 754 binary16 conversions with round-to-nearest-even. The scalar
/// versions are portable; the span versions use F16C when compiled for it.
std::uint16_t float_to_half(float value) noexcept;
float half_to_float(std::uint16_t bits) noexcept;

void float_to_half(std::span<const float> in, std::span<std::uint16_t> out) noexcept;
void half_to_float(std::span<const std::uint16_t> in, std::span<float> out) noexcept;

/// float -> half -> float.
inline float round_to_half(float value) noexcept { return half_to_float(float_to_half(value)); }
void round_to_half(std::span<float> values) noexcept;

}  // namespace mcflow
