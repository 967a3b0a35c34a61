#include "mcflow/io/collated.hpp"

#include <bit>
#include <filesystem>

#include "mcflow/common/binary_io.hpp"
#include "mcflow/common/error.hpp"

static_assert(std::endian::native == std::endian::little, "payload copies assume a little-endian host");

namespace mcflow {
namespace {
constexpr const char* kMagic = "DFCOLL01";
constexpr const char* kIndexMagic = "DFIDX001";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::size_t dtype_size(DType type) {
  switch (type) {
    case DType::bytes:
      return 1;
    case DType::i32:
    case DType::f32:
    case DType::u32:
      return 4;
    case DType::i64:
    case DType::f64:
    case DType::u64:
      return 8;
  }
  throw FormatError("unknown dtype code " + std::to_string(static_cast<int>(type)));
}

std::uint64_t CollatedHeader::file_size() const {
  std::uint64_t total = header_size;
  for (std::size_t r = 0; r < element_counts.size(); ++r) total += payload_size(r);
  return total;
}

void write_collated(const std::string& path, const std::string& name, DType dtype,
                    std::span<const Payload> payloads) {
  if (payloads.empty()) throw ConfigError("a collated file needs at least one rank");
  const std::size_t es = dtype_size(dtype);
  detail::ByteWriter w;
  w.put_chars(kMagic);
  w.put_u32(kVersion);
  w.put_u32(static_cast<std::uint32_t>(payloads.size()));
  w.put_u32(static_cast<std::uint32_t>(name.size()));
  w.put_chars(name);
  w.put_u8(static_cast<std::uint8_t>(dtype));
  for (const auto& p : payloads) {
    if (p.size() % es != 0) throw DimensionError("payload size is not a multiple of the element size");
    w.put_u64(p.size() / es);
  }
  for (const auto& p : payloads) w.put_bytes(p);
  detail::write_file(path, w.bytes());
}

CollatedHeader parse_collated_header(std::span<const std::byte> bytes, const std::string& what) {
  detail::ByteReader r(bytes, what);
  if (r.get_chars(8) != kMagic) throw FormatError(what + ": not a collated file");
  CollatedHeader h;
  h.version = r.get_u32();
  if (h.version != kVersion) throw FormatError(what + ": unsupported version " + std::to_string(h.version));
  const std::uint32_t ranks = r.get_u32();
  if (ranks == 0) throw FormatError(what + ": zero ranks");
  const std::uint32_t name_len = r.get_u32();
  if (name_len > r.remaining()) throw FormatError(what + ": truncated header");
  h.name = r.get_chars(name_len);
  const std::uint8_t code = r.get_u8();
  if (code > 6) throw FormatError(what + ": unknown dtype code " + std::to_string(code));
  h.dtype = static_cast<DType>(code);
  if (static_cast<std::uint64_t>(ranks) * 8 > r.remaining()) throw FormatError(what + ": truncated header");
  h.element_counts.resize(ranks);
  for (auto& c : h.element_counts) c = r.get_u64();
  h.header_size = r.position();
  return h;
}

CollatedHeader read_collated_header(const std::string& path) {
  constexpr std::size_t kPrefix = 1 << 16;
  const auto prefix = detail::read_file_prefix(path, kPrefix);
  try {
    return parse_collated_header(prefix, path);
  } catch (const FormatError&) {
    if (prefix.size() < kPrefix) throw;
  }
  return parse_collated_header(detail::read_file(path), path);
}

std::vector<Payload> read_collated(const std::string& path) {
  const auto bytes = detail::read_file(path);
  const auto h = parse_collated_header(bytes, path);
  if (h.file_size() != bytes.size()) throw FormatError(path + ": file size does not match header");
  std::vector<Payload> out(h.rank_count());
  std::uint64_t pos = h.header_size;
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto len = h.payload_size(r);
    out[r].assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return out;
}

std::string index_path(const std::string& collated_path) { return collated_path + ".idx"; }

std::vector<std::byte> serialize_index(const IndexSidecar& index) {
  detail::ByteWriter w;
  w.put_chars(kIndexMagic);
  w.put_u32(static_cast<std::uint32_t>(index.records.size()));
  for (const auto& rec : index.records) {
    w.put_u64(rec.offset);
    w.put_u64(rec.length);
  }
  return w.take();
}

IndexSidecar build_index(const std::string& collated_path) {
  const auto bytes = detail::read_file(collated_path);
  const auto h = parse_collated_header(bytes, collated_path);
  if (h.file_size() != bytes.size()) throw FormatError(collated_path + ": file size does not match header");
  IndexSidecar idx;
  std::uint64_t pos = h.header_size;
  for (std::size_t r = 0; r < h.rank_count(); ++r) {
    idx.records.push_back({pos, h.payload_size(r)});
    pos += h.payload_size(r);
  }
  detail::write_file(index_path(collated_path), serialize_index(idx));
  return idx;
}

IndexSidecar read_index(const std::string& path) {
  const auto bytes = detail::read_file(path);
  detail::ByteReader r(bytes, path);
  if (r.get_chars(8) != kIndexMagic) throw FormatError(path + ": not an index file");
  const std::uint32_t n = r.get_u32();
  if (r.remaining() != static_cast<std::uint64_t>(n) * 16) throw FormatError(path + ": index length mismatch");
  IndexSidecar idx;
  idx.records.resize(n);
  for (auto& rec : idx.records) {
    rec.offset = r.get_u64();
    rec.length = r.get_u64();
  }
  return idx;
}

void validate_index(const IndexSidecar& index, std::uint64_t file_size) {
  if (index.records.empty()) throw FormatError("index has no records");
  for (std::size_t i = 0; i < index.records.size(); ++i) {
    const auto& rec = index.records[i];
    if (rec.offset + rec.length < rec.offset || rec.offset + rec.length > file_size) {
      throw FormatError("index record " + std::to_string(i) + " extends past the end of the file");
    }
    if (i > 0) {
      const auto& prev = index.records[i - 1];
      if (rec.offset <= prev.offset && !(prev.length == 0 && rec.offset == prev.offset)) {
        throw FormatError("index offsets are not increasing at record " + std::to_string(i));
      }
      if (prev.offset + prev.length != rec.offset) {
        throw FormatError("index records " + std::to_string(i - 1) + " and " + std::to_string(i) + " are not contiguous");
      }
    }
  }
  const auto& last = index.records.back();
  if (last.offset + last.length != file_size) throw FormatError("index does not reach the end of the file");
}

}  // namespace mcflow
