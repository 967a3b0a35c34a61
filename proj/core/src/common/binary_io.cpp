#include "mcflow/common/binary_io.hpp"

#include <cerrno>
#include <fstream>
#include <system_error>
#include <algorithm>

namespace mcflow::detail {

std::vector<std::byte> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  const auto size = static_cast<std::size_t>(in.tellg());
  std::vector<std::byte> data(size);
  in.seekg(0);
  if (size > 0 && !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size))) {
    throw IoError("short read on '" + path + "'");
  }
  return data;
}

std::uint64_t file_size(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return static_cast<std::uint64_t>(in.tellg());
}

void read_file_range(const std::string& path, std::uint64_t offset, std::span<std::byte> out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  in.seekg(static_cast<std::streamoff>(offset));
  if (!out.empty() && !in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()))) {
    throw IoError("short read on '" + path + "' at offset " + std::to_string(offset));
  }
}

std::vector<std::byte> read_file_prefix(const std::string& path, std::size_t max_bytes) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  const auto size = std::min<std::size_t>(static_cast<std::size_t>(in.tellg()), max_bytes);
  std::vector<std::byte> data(size);
  in.seekg(0);
  if (size > 0 && !in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(size))) {
    throw IoError("short read on '" + path + "'");
  }
  return data;
}

void write_file(const std::string& path, std::span<const std::byte> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::generic_category().message(errno));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace mcflow::detail
