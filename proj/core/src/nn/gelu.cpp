#include "mcflow/nn/gelu.hpp"

#include <cmath>
#include <numbers>

#include "mcflow/nn/half.hpp"

namespace mcflow {

double gelu_exact(double x) noexcept {
  const double k = std::sqrt(2.0 / std::numbers::pi);
  return 0.5 * x * (1.0 + std::tanh(k * (x + 0.044715 * x * x * x)));
}

void gelu_exact(std::span<const double> in, std::span<double> out) noexcept {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = gelu_exact(in[i]);
}

GeluTable::GeluTable(CoefficientPrecision precision) : precision_(precision) {
  knots_.resize(intervals + 1);
  coeffs_.resize(intervals);
  for (int i = 0; i <= intervals; ++i) knots_[static_cast<std::size_t>(i)] = static_cast<float>(lo + i * step);
  for (int i = 0; i < intervals; ++i) {
    // Fit in terms of u measured from the stored (float) knot.
    const double x0 = knots_[static_cast<std::size_t>(i)];
    const double h = static_cast<double>(knots_[static_cast<std::size_t>(i) + 1]) - x0;
    const double f0 = gelu_exact(x0);
    const double fm = gelu_exact(x0 + 0.5 * h);
    const double f1 = gelu_exact(x0 + h);
    const double c = 2.0 * (f1 - 2.0 * fm + f0) / (h * h);
    const double b = (4.0 * fm - 3.0 * f0 - f1) / h;
    std::array<float, 3> k{static_cast<float>(f0), static_cast<float>(b), static_cast<float>(c)};
    if (precision == CoefficientPrecision::fp16) {
      for (auto& v : k) v = round_to_half(v);
    }
    coeffs_[static_cast<std::size_t>(i)] = k;
  }
}

void GeluTable::apply(std::span<float> values) const noexcept {
  for (auto& v : values) v = (*this)(v);
}

const GeluTable& gelu_table(CoefficientPrecision precision) {
  static const GeluTable f32(CoefficientPrecision::fp32);
  static const GeluTable f16(CoefficientPrecision::fp16);
  return precision == CoefficientPrecision::fp16 ? f16 : f32;
}

}  // namespace mcflow
