#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace mcflow {

enum class DType : std::uint8_t { bytes = 0, i32 = 1, i64 = 2, f32 = 3, f64 = 4, u32 = 5, u64 = 6 };

std::size_t dtype_size(DType type);

/// Collated file, little-endian:
///   "DFCOLL01" | u32 version (1) | u32 rank_count | u32 name_len | name
///   | u8 dtype | u64 element_count[rank_count] | payloads in rank order.
struct CollatedHeader {
  std::uint32_t version = 1;
  std::string name;
  DType dtype = DType::bytes;
  std::vector<std::uint64_t> element_counts;
  std::uint64_t header_size = 0;

  [[nodiscard]] std::uint32_t rank_count() const noexcept { return static_cast<std::uint32_t>(element_counts.size()); }
  [[nodiscard]] std::uint64_t payload_size(std::size_t rank) const { return element_counts.at(rank) * dtype_size(dtype); }
  [[nodiscard]] std::uint64_t file_size() const;
};

using Payload = std::vector<std::byte>;

/// Writes one payload per rank. Payload sizes must be multiples of the
/// element size.
void write_collated(const std::string& path, const std::string& name, DType dtype,
                    std::span<const Payload> per_rank_payloads);

CollatedHeader parse_collated_header(std::span<const std::byte> bytes, const std::string& what);
CollatedHeader read_collated_header(const std::string& path);

/// Reads and splits the whole file.
std::vector<Payload> read_collated(const std::string& path);

/// Sidecar index, little-endian: "DFIDX001" | u32 rank_count
///   | rank_count x (u64 offset, u64 length).
struct IndexRecord {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  friend bool operator==(const IndexRecord&, const IndexRecord&) = default;
};

struct IndexSidecar {
  std::vector<IndexRecord> records;
  friend bool operator==(const IndexSidecar&, const IndexSidecar&) = default;
};

std::string index_path(const std::string& collated_path);

/// Computes the index of a collated file and writes it to index_path().
IndexSidecar build_index(const std::string& collated_path);
IndexSidecar read_index(const std::string& path);
std::vector<std::byte> serialize_index(const IndexSidecar& index);

/// Throws FormatError unless offsets increase strictly, records are
/// contiguous, and the last one ends at `file_size`.
void validate_index(const IndexSidecar& index, std::uint64_t file_size);

template <class T>
Payload to_payload(std::span<const T> values) {
  Payload p(values.size_bytes());
  if (!p.empty()) std::memcpy(p.data(), values.data(), p.size());
  return p;
}

template <class T>
std::vector<T> from_payload(std::span<const std::byte> bytes) {
  std::vector<T> v(bytes.size() / sizeof(T));
  if (!v.empty()) std::memcpy(v.data(), bytes.data(), v.size() * sizeof(T));
  return v;
}

}  // namespace mcflow
