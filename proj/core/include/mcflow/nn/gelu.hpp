#pragma once

#include <array>
#include <span>
#include <vector>

namespace mcflow {

/// 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))) in double precision.
double gelu_exact(double x) noexcept;
void gelu_exact(std::span<const double> in, std::span<double> out) noexcept;

enum class CoefficientPrecision { fp32, fp16 };

/// Piecewise quadratic GeLU on [-3, 3] with 600 intervals of width 0.01.
/// Each quadratic p(u) = a + b u + c u^2, u = x - x_i, interpolates the exact
/// function at the left end, midpoint and right end of its interval.
/// Below -3 the table returns 0, above 3 it returns x.
class GeluTable {
 public:
  static constexpr double lo = -3.0;
  static constexpr double hi = 3.0;
  static constexpr double step = 0.01;
  static constexpr int intervals = 600;

  explicit GeluTable(CoefficientPrecision precision = CoefficientPrecision::fp32);

  [[nodiscard]] float operator()(float x) const noexcept {
    if (x < static_cast<float>(lo)) return 0.0f;
    if (x > static_cast<float>(hi)) return x;
    int i = static_cast<int>((x - static_cast<float>(lo)) * 100.0f);
    i = i < 0 ? 0 : (i >= intervals ? intervals - 1 : i);
    if (i + 1 < intervals && x >= knots_[static_cast<std::size_t>(i) + 1]) ++i;
    if (i > 0 && x < knots_[static_cast<std::size_t>(i)]) --i;
    const float u = x - knots_[static_cast<std::size_t>(i)];
    const auto& k = coeffs_[static_cast<std::size_t>(i)];
    return k[0] + u * (k[1] + u * k[2]);
  }
  void apply(std::span<float> values) const noexcept;

  [[nodiscard]] CoefficientPrecision precision() const noexcept { return precision_; }
  [[nodiscard]] float knot(int i) const { return knots_.at(static_cast<std::size_t>(i)); }
  /// (a, b, c) of interval i, rounded to the table's coefficient precision.
  [[nodiscard]] const std::array<float, 3>& coefficients(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }

 private:
  CoefficientPrecision precision_;
  std::vector<float> knots_;
  std::vector<std::array<float, 3>> coeffs_;
};

/// Shared, lazily built tables.
const GeluTable& gelu_table(CoefficientPrecision precision);

}  // namespace mcflow
