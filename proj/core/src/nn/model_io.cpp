#include "mcflow/nn/model_io.hpp"

#include "mcflow/common/binary_io.hpp"
#include "mcflow/common/error.hpp"

namespace mcflow {
namespace {
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxLayers = 1024;
}  // namespace

std::vector<std::byte> serialize_model(const MlpModel& m) {
  detail::ByteWriter w;
  w.put_chars("MCNN");
  w.put_u32(kVersion);
  w.put_u8(static_cast<std::uint8_t>(m.precision()));
  w.put_u8(static_cast<std::uint8_t>(m.activation()));
  w.put_u32(static_cast<std::uint32_t>(m.layer_count()));
  for (auto d : m.dims()) w.put_u32(d);
  for (float v : m.mean()) w.put_f32(v);
  for (float v : m.stddev()) w.put_f32(v);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    if (m.precision() == Precision::fp32) {
      for (float v : m.weights_f32(l)) w.put_f32(v);
      for (float v : m.bias_f32(l)) w.put_f32(v);
    } else {
      for (auto v : m.weights_f16(l)) w.put_u16(v);
      for (auto v : m.bias_f16(l)) w.put_u16(v);
    }
  }
  return w.take();
}

MlpModel deserialize_model(std::span<const std::byte> bytes, const std::string& what) {
  detail::ByteReader r(bytes, what);
  if (r.get_chars(4) != "MCNN") throw FormatError(what + ": bad magic");
  const std::uint32_t version = r.get_u32();
  if (version != kVersion) throw FormatError(what + ": unsupported version " + std::to_string(version));
  const std::uint8_t precision = r.get_u8();
  const std::uint8_t activation = r.get_u8();
  if (precision > 1) throw FormatError(what + ": unknown precision tag");
  if (activation > 1) throw FormatError(what + ": unknown activation tag");
  const std::uint32_t layers = r.get_u32();
  if (layers == 0 || layers > kMaxLayers) throw FormatError(what + ": invalid layer count");
  std::vector<std::uint32_t> dims(layers + 1);
  std::uint64_t payload = 0;
  for (auto& d : dims) {
    d = r.get_u32();
    if (d == 0) throw FormatError(what + ": zero layer width");
  }
  for (std::uint32_t l = 0; l < layers; ++l) payload += (static_cast<std::uint64_t>(dims[l]) + 1) * dims[l + 1];
  const std::uint64_t elem = precision == 0 ? 4 : 2;
  if (payload * elem + 8ull * dims[0] != r.remaining()) {
    throw FormatError(what + ": file size does not match the declared shape");
  }
  MlpModel m(dims, static_cast<Precision>(precision), static_cast<Activation>(activation));
  std::vector<float> mean(dims[0]), sd(dims[0]);
  for (auto& v : mean) v = r.get_f32();
  for (auto& v : sd) v = r.get_f32();
  try {
    m.set_normalization(std::move(mean), std::move(sd));
  } catch (const Error& e) {
    throw FormatError(what + ": " + e.what());
  }
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::size_t nw = static_cast<std::size_t>(dims[l]) * dims[l + 1];
    if (precision == 0) {
      std::vector<float> w(nw), b(dims[l + 1]);
      for (auto& v : w) v = r.get_f32();
      for (auto& v : b) v = r.get_f32();
      m.set_layer(l, w, b);
    } else {
      std::vector<std::uint16_t> w(nw), b(dims[l + 1]);
      for (auto& v : w) v = r.get_u16();
      for (auto& v : b) v = r.get_u16();
      m.set_layer_f16(l, w, b);
    }
  }
  return m;
}

void save_model(const MlpModel& model, const std::string& path) { detail::write_file(path, serialize_model(model)); }

MlpModel load_model(const std::string& path) { return deserialize_model(detail::read_file(path), path); }

}  // namespace mcflow
