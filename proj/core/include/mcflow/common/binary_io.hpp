#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcflow/common/error.hpp"

namespace mcflow::detail {

/// Appends little-endian encoded values to a byte buffer.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { bytes_.push_back(static_cast<std::byte>(v)); }
  void put_u32(std::uint32_t v) { put_le(v); }
  void put_u64(std::uint64_t v) { put_le(v); }
  void put_i32(std::int32_t v) { put_le(static_cast<std::uint32_t>(v)); }
  void put_u16(std::uint16_t v) { put_le(v); }
  void put_f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le(bits);
  }
  void put_f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_le(bits);
  }
  void put_bytes(std::span<const std::byte> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  void put_chars(std::string_view s) {
    for (char c : s) bytes_.push_back(static_cast<std::byte>(c));
  }

  [[nodiscard]] const std::vector<std::byte>& bytes() const noexcept { return bytes_; }
  [[nodiscard]] std::vector<std::byte> take() { return std::move(bytes_); }
  [[nodiscard]] std::size_t size() const noexcept { return bytes_.size(); }

 private:
  template <typename U>
  void put_le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      bytes_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
    }
  }

  std::vector<std::byte> bytes_;
};

/// Bounds-checked little-endian decoder over a byte span. Reading past the
/// end throws FormatError naming `what`.
class ByteReader {
 public:
  ByteReader(std::span<const std::byte> data, std::string what) : data_(data), what_(std::move(what)) {}

  std::uint8_t get_u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint16_t get_u16() { return get_le<std::uint16_t>(); }
  std::uint32_t get_u32() { return get_le<std::uint32_t>(); }
  std::uint64_t get_u64() { return get_le<std::uint64_t>(); }
  std::int32_t get_i32() { return static_cast<std::int32_t>(get_le<std::uint32_t>()); }
  float get_f32() {
    const auto bits = get_le<std::uint32_t>();
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  double get_f64() {
    const auto bits = get_le<std::uint64_t>();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string get_chars(std::size_t n) {
    auto s = take(n);
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }
  std::span<const std::byte> get_bytes(std::size_t n) { return take(n); }

  [[nodiscard]] std::size_t position() const noexcept { return pos_; }
  [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  std::span<const std::byte> take(std::size_t n) {
    if (n > remaining()) {
      throw FormatError(what_ + ": truncated (need " + std::to_string(n) + " bytes at offset " +
                        std::to_string(pos_) + ", have " + std::to_string(remaining()) + ")");
    }
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  template <typename U>
  U get_le() {
    auto s = take(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(std::to_integer<std::uint8_t>(s[i])) << (8 * i));
    }
    return v;
  }

  std::span<const std::byte> data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::vector<std::byte> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::byte> data);
std::uint64_t file_size(const std::string& path);
/// Fills `out` with the bytes starting at `offset`; throws IoError on short reads.
void read_file_range(const std::string& path, std::uint64_t offset, std::span<std::byte> out);
std::vector<std::byte> read_file_prefix(const std::string& path, std::size_t max_bytes);

}  // namespace mcflow::detail
