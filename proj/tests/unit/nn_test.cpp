#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mcflow/common/binary_io.hpp"
#include "mcflow/common/error.hpp"
#include "mcflow/common/thread_pool.hpp"
#include "mcflow/nn/gelu.hpp"
#include "mcflow/nn/half.hpp"
#include "mcflow/nn/mlp.hpp"
#include "mcflow/nn/model_io.hpp"

namespace mcflow {
namespace {

namespace fs = std::filesystem;

// Independent binary16 decoder used by the rounding oracle.
double decode_half(std::uint16_t h) {
  const int sign = h >> 15, exp = (h >> 10) & 0x1f, man = h & 0x3ff;
  double v = exp == 0 ? std::ldexp(man, -24) : std::ldexp(1024 + man, exp - 25);
  return sign ? -v : v;
}

// Nearest finite half to |x| by search over the sorted positive encodings,
// ties to the even encoding, overflow to infinity past the rounding limit.
std::uint16_t oracle_half(float x) {
  const double a = std::fabs(static_cast<double>(x));
  const std::uint16_t sign = std::signbit(x) ? 0x8000 : 0;
  if (a >= 65520.0) return sign | 0x7c00;
  std::uint16_t lo = 0, hi = 0x7bff;
  while (lo < hi) {  // largest encoding with value <= a
    const std::uint16_t mid = static_cast<std::uint16_t>((lo + hi + 1) / 2);
    if (decode_half(mid) <= a) lo = mid; else hi = static_cast<std::uint16_t>(mid - 1);
  }
  if (decode_half(lo) == a || lo == 0x7bff) return sign | lo;
  const double dl = a - decode_half(lo), du = decode_half(static_cast<std::uint16_t>(lo + 1)) - a;
  const std::uint16_t pick = dl < du ? lo : (du < dl ? static_cast<std::uint16_t>(lo + 1) : ((lo & 1) ? lo + 1 : lo));
  return sign | pick;
}

TEST(Half, KnownEncodings) {
  EXPECT_EQ(float_to_half(1.0f), 0x3c00);
  EXPECT_EQ(float_to_half(-2.0f), 0xc000);
  EXPECT_EQ(float_to_half(-0.0f), 0x8000);
  EXPECT_EQ(float_to_half(65504.0f), 0x7bff);
  EXPECT_EQ(float_to_half(65519.0f), 0x7bff);
  EXPECT_EQ(float_to_half(65520.0f), 0x7c00);
  EXPECT_EQ(float_to_half(std::ldexp(1.0f, -24)), 0x0001);
  EXPECT_EQ(float_to_half(std::ldexp(1.0f, -25)), 0x0000);
  EXPECT_EQ(float_to_half(std::ldexp(3.0f, -26)), 0x0001);
  EXPECT_EQ(float_to_half(1.0f + std::ldexp(1.0f, -11)), 0x3c00);
  EXPECT_EQ(float_to_half(1.0f + std::ldexp(3.0f, -11)), 0x3c02);
  EXPECT_EQ(float_to_half(INFINITY), 0x7c00);
  const auto nan = float_to_half(NAN);
  EXPECT_EQ(nan & 0x7c00, 0x7c00);
  EXPECT_NE(nan & 0x03ff, 0);
  EXPECT_TRUE(std::isnan(half_to_float(nan)));
}

TEST(Half, ExhaustiveDecodeEncodeRoundTrip) {
  for (std::uint32_t h = 0; h < 0x10000; ++h) {
    const auto bits = static_cast<std::uint16_t>(h);
    if ((bits & 0x7c00) == 0x7c00 && (bits & 0x3ff) != 0) continue;
    ASSERT_EQ(float_to_half(half_to_float(bits)), bits) << std::hex << h;
    ASSERT_EQ(static_cast<double>(half_to_float(bits)), (bits & 0x7c00) == 0x7c00 ? (bits >> 15 ? -INFINITY : INFINITY)
                                                                                   : decode_half(bits));
  }
}

TEST(Half, RoundingMatchesNearestEvenOracle) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> e(-30, 17);
  std::uniform_real_distribution<float> m(1.0f, 2.0f);
  for (int k = 0; k < 100000; ++k) {
    float x = std::ldexp(m(rng), e(rng));
    if (k & 1) x = -x;
    ASSERT_EQ(float_to_half(x), oracle_half(x)) << x;
  }
  // Exact ties between neighbouring halves.
  for (std::uint16_t h = 0; h < 0x7bff; h += 7) {
    const float mid = static_cast<float>((decode_half(h) + decode_half(static_cast<std::uint16_t>(h + 1))) / 2);
    ASSERT_EQ(float_to_half(mid), oracle_half(mid)) << h;
  }
}

TEST(Half, BulkConversionMatchesScalar) {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> e(-28, 17);
  std::uniform_real_distribution<float> m(-2.0f, 2.0f);
  std::vector<float> x(10001);
  for (auto& v : x) v = std::ldexp(m(rng), e(rng));
  x[3] = 65520.0f;
  x[4] = -0.0f;
  std::vector<std::uint16_t> h(x.size());
  float_to_half(x, h);
  std::vector<float> back(x.size());
  half_to_float(h, back);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ASSERT_EQ(h[i], float_to_half(x[i])) << i;
    ASSERT_EQ(std::bit_cast<std::uint32_t>(back[i]), std::bit_cast<std::uint32_t>(half_to_float(h[i])));
  }
  auto copy = x;
  round_to_half(copy);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(copy[i], round_to_half(x[i]));
}

TEST(GeluExact, ReferenceValues) {
  EXPECT_EQ(gelu_exact(0.0), 0.0);
  EXPECT_NEAR(gelu_exact(1.0), 0.841192, 5e-7);
  EXPECT_NEAR(gelu_exact(-3.0), -3.6374e-3, 1e-7);
  const long double c = std::sqrt(2.0L / 3.14159265358979323846264338327950288L);
  for (double x = -6.0; x <= 6.0; x += 0.173) {
    const long double lx = x;
    const long double ref = 0.5L * lx * (1.0L + std::tanh(c * (lx + 0.044715L * lx * lx * lx)));
    EXPECT_NEAR(gelu_exact(x), static_cast<double>(ref), 1e-15);
    EXPECT_NEAR(gelu_exact(x) - gelu_exact(-x), x, 1e-14);
  }
  std::vector<double> in{-1.0, 0.5, 2.0}, out(3);
  gelu_exact(in, out);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(out[i], gelu_exact(in[i]));
}

TEST(GeluTable, Layout) {
  const auto& t = gelu_table(CoefficientPrecision::fp32);
  EXPECT_EQ(GeluTable::intervals, 600);
  EXPECT_EQ(t.knot(0), -3.0f);
  EXPECT_EQ(t.knot(600), 3.0f);
  EXPECT_THROW((void)t.knot(601), std::out_of_range);
  for (int i = 0; i < 600; ++i) EXPECT_LT(t.knot(i), t.knot(i + 1));
}

TEST(GeluTable, KnotConsistency) {
  const auto& t = gelu_table(CoefficientPrecision::fp32);
  for (int i = 0; i <= 600; ++i) {
    const float x = t.knot(i);
    const double g = gelu_exact(x);
    const double half_ulp = 0.5 * (std::nextafter(static_cast<float>(std::fabs(g)), INFINITY) - static_cast<float>(std::fabs(g)));
    EXPECT_LE(std::fabs(t(x) - g), std::max(1e-7, half_ulp)) << "knot " << i;
  }
}

TEST(GeluTable, DenseScanErrorBound) {
  for (auto prec : {CoefficientPrecision::fp32, CoefficientPrecision::fp16}) {
    const GeluTable t(prec);
    double worst = 0.0;
    for (int k = 0; k <= 1000000; ++k) {
      const float x = static_cast<float>(-3.0 + 6.0 * k / 1e6);
      worst = std::max(worst, std::fabs(t(x) - gelu_exact(x)));
    }
    if (prec == CoefficientPrecision::fp32) {
      EXPECT_LE(worst, 1e-5);
    } else {
      EXPECT_LE(worst, 3e-3);  // coefficients carry ~11 significant bits
    }
  }
}

TEST(GeluTable, ClampRegion) {
  const auto& t = gelu_table(CoefficientPrecision::fp32);
  EXPECT_EQ(t(-3.0001f), 0.0f);
  EXPECT_EQ(t(3.0001f), 3.0001f);
  EXPECT_EQ(t(-50.0f), 0.0f);
  double worst = 0.0, where = 0.0;
  for (int k = 0; k <= 1200000; ++k) {
    const float x = static_cast<float>(-6.0 + 12.0 * k / 1.2e6);
    const double e = std::fabs(t(x) - gelu_exact(x));
    if (e > worst) worst = e, where = x;
  }
  EXPECT_LE(worst, 5e-3);
  EXPECT_NEAR(std::fabs(where), 3.0, 0.01);
}

TEST(GeluTable, ContinuousAcrossKnots) {
  const auto& t = gelu_table(CoefficientPrecision::fp32);
  for (int i = 1; i < 600; ++i) {
    const float k = t.knot(i);
    EXPECT_NEAR(t(std::nextafter(k, -INFINITY)), t(k), 1e-6) << i;
  }
}

TEST(GeluTable, ApplyMatchesScalar) {
  for (auto prec : {CoefficientPrecision::fp32, CoefficientPrecision::fp16}) {
    const auto& t = gelu_table(prec);
    std::vector<float> v;
    for (float x = -4.0f; x < 4.0f; x += 0.00137f) v.push_back(x);
    auto out = v;
    t.apply(out);
    for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(out[i], t(v[i])) << v[i];
  }
}

TEST(GeluTable, Fp16CoefficientsAreRepresentable) {
  const auto& t = gelu_table(CoefficientPrecision::fp16);
  for (int i = 0; i < 600; ++i) {
    for (float c : t.coefficients(i)) EXPECT_EQ(round_to_half(c), c);
  }
}

// Straightforward double-accumulated evaluation used as the fp32 oracle.
std::vector<double> reference_fp32(const MlpModel& m, std::span<const float> x) {
  const std::size_t in = m.input_width();
  std::vector<double> a(in);
  for (std::size_t j = 0; j < in; ++j) a[j] = (static_cast<double>(x[j]) - m.mean()[j]) / m.stddev()[j];
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const std::size_t n = m.dims()[l], o = m.dims()[l + 1];
    const auto w = m.weights(l), b = m.bias(l);
    std::vector<double> y(o);
    for (std::size_t r = 0; r < o; ++r) {
      double s = b[r];
      for (std::size_t c = 0; c < n; ++c) s += static_cast<double>(w[r * n + c]) * a[c];
      if (l + 1 < m.layer_count()) {
        s = m.activation() == Activation::gelu_table ? gelu_table(CoefficientPrecision::fp32)(static_cast<float>(s))
                                                     : gelu_exact(s);
      }
      y[r] = s;
    }
    a = std::move(y);
  }
  return a;
}

std::vector<float> normal_inputs(const MlpModel& m, std::size_t batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> x(batch * m.input_width());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = i % m.input_width();
    x[i] = m.mean()[j] + m.stddev()[j] * n(rng);
  }
  return x;
}

TEST(Mlp, IdentityLayerIsExact) {
  MlpModel m({4, 4});
  std::vector<float> w(16, 0.0f), b(4, 0.0f);
  for (int i = 0; i < 4; ++i) w[i * 5] = 1.0f;
  m.set_layer(0, w, b);
  const std::vector<float> x{1.5f, -2.25f, 1e-3f, 123.0f, 0.0f, 7.0f, -1.0f, 3.0f};
  EXPECT_EQ(infer(m, x, 2), x);
}

TEST(Mlp, ShapeAndNormalisationChecks) {
  EXPECT_THROW(MlpModel({4}), DimensionError);
  EXPECT_THROW(MlpModel({4, 0, 2}), DimensionError);
  MlpModel m({3, 2});
  EXPECT_THROW(m.set_layer(0, std::vector<float>(5), std::vector<float>(2)), DimensionError);
  EXPECT_THROW(m.set_layer(1, std::vector<float>(6), std::vector<float>(2)), DimensionError);
  EXPECT_THROW(m.set_normalization({0, 0, 0}, {1, 0, 1}), DomainError);
  EXPECT_THROW(m.set_normalization({0, 0}, {1, 1}), DimensionError);
  EXPECT_THROW((void)infer(m, std::vector<float>(5), 2), DimensionError);
  std::vector<float> x(6, 0.0f);
  x[4] = NAN;
  EXPECT_THROW((void)infer(m, x, 2), DomainError);
}

TEST(Mlp, Fp32MatchesDoubleReference) {
  for (auto act : {Activation::gelu_exact, Activation::gelu_table}) {
    const auto m = MlpModel::random({7, 48, 33, 5}, 3, Precision::fp32, act);
    const auto x = normal_inputs(m, 200, 4);
    const auto y = infer(m, x, 200);
    const double tol = 1e-5;
    for (std::size_t s = 0; s < 200; ++s) {
      const auto ref = reference_fp32(m, std::span<const float>(x).subspan(s * 7, 7));
      double num = 0.0, den = 0.0;
      for (std::size_t o = 0; o < 5; ++o) {
        num += (y[s * 5 + o] - ref[o]) * (y[s * 5 + o] - ref[o]);
        den += ref[o] * ref[o];
      }
      ASSERT_LE(std::sqrt(num / den), tol) << s;
    }
  }
}

TEST(Mlp, BatchIndependenceBitwise) {
  ThreadPool pool(3);
  for (auto prec : {Precision::fp32, Precision::mixed_fp16}) {
    for (auto act : {Activation::gelu_exact, Activation::gelu_table}) {
      const auto m = MlpModel::random({5, 19, 3}, 8, prec, act);
      const auto x = normal_inputs(m, 600, 2);
      const auto all = infer(m, x, 600, {&pool});
      EXPECT_EQ(all, infer(m, x, 600));
      for (std::size_t s : {0u, 1u, 2u, 15u, 16u, 17u, 255u, 256u, 599u}) {
        const auto one = infer(m, std::span<const float>(x).subspan(s * 5, 5), 1);
        for (std::size_t o = 0; o < 3; ++o) ASSERT_EQ(one[o], all[s * 3 + o]) << s;
      }
      const auto three = infer(m, std::span<const float>(x).first(15), 3);
      EXPECT_TRUE(std::equal(three.begin(), three.end(), all.begin()));
    }
  }
}

TEST(Mlp, MixedPrecisionMatchesStepwiseOracle) {
  const auto m = MlpModel::random({6, 24, 10, 4}, 12, Precision::mixed_fp16, Activation::gelu_table);
  const auto& table = gelu_table(CoefficientPrecision::fp16);
  const auto x = normal_inputs(m, 64, 13);
  const auto y = infer(m, x, 64);
  for (std::size_t s = 0; s < 64; ++s) {
    std::vector<float> a(6);
    for (std::size_t j = 0; j < 6; ++j) a[j] = round_to_half((x[s * 6 + j] - m.mean()[j]) / m.stddev()[j]);
    for (std::size_t l = 0; l < 3; ++l) {
      const std::size_t n = m.dims()[l], o = m.dims()[l + 1];
      std::vector<float> next(o);
      for (std::size_t r = 0; r < o; ++r) {
        double acc = half_to_float(m.bias_f16(l)[r]);
        for (std::size_t c = 0; c < n; ++c) acc += static_cast<double>(half_to_float(m.weights_f16(l)[r * n + c])) * a[c];
        float v = round_to_half(static_cast<float>(acc));
        if (l < 2) v = round_to_half(table(v));
        next[r] = v;
      }
      a = std::move(next);
    }
    for (std::size_t o = 0; o < 4; ++o) {
      // fp32 accumulation order may move a value across one binary16 rounding boundary per layer.
      EXPECT_NEAR(y[s * 4 + o], a[o], 4e-3 * std::max(1.0f, std::fabs(a[o]))) << s;
    }
  }
}

TEST(Mlp, MixedPrecisionAccuracyAgainstFp32) {
  const auto m32 = MlpModel::random({20, 256, 512, 256, 128, 17}, 21);
  const auto m16 = m32.converted(Precision::mixed_fp16);
  const auto x = normal_inputs(m32, 2000, 22);
  const auto y32 = infer(m32, x, 2000), y16 = infer(m16, x, 2000);
  double worst = 0.0, sum = 0.0;
  for (std::size_t s = 0; s < 2000; ++s) {
    double num = 0.0, den = 0.0;
    for (std::size_t o = 0; o < 17; ++o) {
      const double d = y16[s * 17 + o] - y32[s * 17 + o];
      num += d * d;
      den += static_cast<double>(y32[s * 17 + o]) * y32[s * 17 + o];
    }
    const double e = std::sqrt(num / den);
    worst = std::max(worst, e);
    sum += e;
  }
  EXPECT_LE(worst, 0.02);
  EXPECT_LE(sum / 2000, 0.005);
}

TEST(Mlp, FlopCountIndependentOfPrecision) {
  const auto m = MlpModel::random({20, 2048, 4096, 2048, 1024, 512, 17}, 1);
  const std::uint64_t expect = 2ull * (20 * 2048 + 2048 * 4096 + 4096 * 2048 + 2048 * 1024 + 1024 * 512 + 512 * 17);
  EXPECT_EQ(m.flops_per_sample(), expect);
  EXPECT_EQ(m.converted(Precision::mixed_fp16).flops_per_sample(), expect);
  EXPECT_EQ(m.parameter_count(), expect / 2 + 2048 + 4096 + 2048 + 1024 + 512 + 17);
}

TEST(Mlp, ZscoreContract) {
  MlpModel m({3, 1});
  m.set_normalization({2.0f, -5.0f, 0.0f}, {0.5f, 3.0f, 10.0f});
  const auto x = normal_inputs(m, 100000, 31);
  const auto z = zscore(m, x);
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t s = 0; s < 100000; ++s) mean += z[s * 3 + j];
    mean /= 1e5;
    for (std::size_t s = 0; s < 100000; ++s) sq += (z[s * 3 + j] - mean) * (z[s * 3 + j] - mean);
    EXPECT_LE(std::fabs(mean), 0.01);
    EXPECT_NEAR(std::sqrt(sq / 1e5), 1.0, 0.01);
  }
}

TEST(Mlp, ConversionRoundsWeights) {
  const auto m = MlpModel::random({4, 8, 2}, 6);
  const auto h = m.converted(Precision::mixed_fp16);
  EXPECT_EQ(h.precision(), Precision::mixed_fp16);
  const auto w = m.weights(0), wh = h.weights(0);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(wh[i], round_to_half(w[i]));
  EXPECT_TRUE(h.converted(Precision::mixed_fp16) == h);
}

TEST(Mlp, ParseNames) {
  EXPECT_EQ(parse_precision("fp16"), Precision::mixed_fp16);
  EXPECT_EQ(parse_precision("fp32"), Precision::fp32);
  EXPECT_EQ(parse_activation("exact"), Activation::gelu_exact);
  EXPECT_EQ(parse_activation("table"), Activation::gelu_table);
  EXPECT_THROW(parse_precision("bf16"), ConfigError);
  EXPECT_EQ(to_string(Precision::mixed_fp16), "mixed_fp16");
}

class ModelFile : public ::testing::Test {
 protected:
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) {
    fs::create_directories(dir_);
    return (dir_ / name).string();
  }
  fs::path dir_ = fs::temp_directory_path() / "mcflow_nn_test";
};

TEST_F(ModelFile, RoundTripPerPrecision) {
  for (auto prec : {Precision::fp32, Precision::mixed_fp16}) {
    const auto m = MlpModel::random({9, 31, 4}, 77, prec, Activation::gelu_exact);
    const auto p = path("m.mcnn");
    save_model(m, p);
    const auto back = load_model(p);
    EXPECT_TRUE(back == m);
    EXPECT_EQ(serialize_model(back), serialize_model(m));
  }
}

TEST_F(ModelFile, HalfModelIsHalfTheSize) {
  const auto m = MlpModel::random({20, 512, 512, 17}, 4);
  const double r = static_cast<double>(serialize_model(m.converted(Precision::mixed_fp16)).size()) /
                   static_cast<double>(serialize_model(m).size());
  EXPECT_NEAR(r, 0.5, 0.01);
}

TEST_F(ModelFile, RejectsCorruption) {
  const auto bytes = serialize_model(MlpModel::random({3, 5, 2}, 1));
  auto bad = bytes;
  bad[0] = std::byte{'X'};
  EXPECT_THROW(deserialize_model(bad), FormatError);
  bad = bytes;
  bad[4] = std::byte{9};
  EXPECT_THROW(deserialize_model(bad), FormatError);
  EXPECT_THROW(deserialize_model(std::span<const std::byte>(bytes).first(bytes.size() - 1)), FormatError);
  EXPECT_THROW(deserialize_model(std::span<const std::byte>(bytes).first(6)), FormatError);
  auto longer = bytes;
  longer.push_back(std::byte{0});
  EXPECT_THROW(deserialize_model(longer), FormatError);
  EXPECT_THROW(load_model(path("missing.mcnn")), IoError);
}

}  // namespace
}  // namespace mcflow
