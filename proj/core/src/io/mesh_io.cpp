#include "mcflow/io/mesh_io.hpp"

#include <filesystem>

#include "mcflow/common/binary_io.hpp"
#include "mcflow/common/error.hpp"
#include "mcflow/io/collated.hpp"
#include "mcflow/mesh/refine.hpp"

namespace mcflow {
namespace {

namespace fs = std::filesystem;

constexpr const char* kFiles[] = {"patches", "points", "faces", "owner", "neighbour"};

std::string file_in(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

template <class T>
void write_array(const std::string& dir, const char* name, DType dtype, std::span<const T> values) {
  const std::string path = file_in(dir, name);
  const Payload payloads[] = {to_payload(values)};
  write_collated(path, name, dtype, payloads);
  build_index(path);
}

// Reads the single payload of a mesh array through its index.
Payload read_array(const std::string& dir, const char* name, DType dtype, MeshReadInfo* info) {
  const std::string path = file_in(dir, name);
  const auto header = read_collated_header(path);
  if (header.rank_count() != 1 || header.dtype != dtype) throw FormatError(path + ": unexpected layout");
  const auto idx = read_index(index_path(path));
  validate_index(idx, detail::file_size(path));
  if (idx.records.size() != 1) throw FormatError(path + ": unexpected index");
  Payload p(idx.records[0].length);
  detail::read_file_range(path, idx.records[0].offset, p);
  if (info != nullptr) info->bytes_read += header.header_size + p.size();
  return p;
}

struct PatchTable {
  Label n_cells = 0;
  std::vector<BoundaryPatch> patches;
};

PatchTable read_patch_table(const std::string& dir, MeshReadInfo* info) {
  const auto bytes = read_array(dir, "patches", DType::bytes, info);
  detail::ByteReader r(bytes, file_in(dir, "patches"));
  PatchTable t;
  t.n_cells = r.get_i32();
  const std::uint32_t n = r.get_u32();
  for (std::uint32_t p = 0; p < n; ++p) {
    BoundaryPatch bp;
    bp.name = r.get_chars(r.get_u32());
    bp.start = r.get_i32();
    bp.size = r.get_i32();
    t.patches.push_back(std::move(bp));
  }
  return t;
}

// Reads everything but the patch table, which the caller already holds.
UnstructuredMesh read_mesh_arrays(const std::string& directory, PatchTable table, MeshReadInfo* info) {
  const auto pts = from_payload<double>(read_array(directory, "points", DType::f64, info));
  const auto face_ids = from_payload<Label>(read_array(directory, "faces", DType::i32, info));
  auto owner = from_payload<Label>(read_array(directory, "owner", DType::i32, info));
  auto neighbour = from_payload<Label>(read_array(directory, "neighbour", DType::i32, info));
  if (pts.size() % 3 != 0 || face_ids.size() % 4 != 0) throw FormatError(directory + ": ragged mesh arrays");
  std::vector<Vec3> points(pts.size() / 3);
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = {pts[3 * i], pts[3 * i + 1], pts[3 * i + 2]};
  std::vector<QuadFace> faces(face_ids.size() / 4);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    for (std::size_t k = 0; k < 4; ++k) faces[i][k] = face_ids[4 * i + k];
  }
  return UnstructuredMesh(table.n_cells, std::move(points), std::move(faces), std::move(owner), std::move(neighbour),
                          std::move(table.patches));
}

StartupResult decompose(UnstructuredMesh mesh, std::uint64_t bytes, const StartupOptions& options) {
  DecomposeOptions d;
  d.seed = options.seed;
  auto partition = two_level_decompose(mesh, options.n_ranks, options.n_threads, d);
  const auto cells = static_cast<std::uint64_t>(mesh.n_cells());
  return StartupResult{std::move(mesh), std::move(partition), bytes, cells};
}

}  // namespace

void write_mesh(const std::string& directory, const UnstructuredMesh& mesh) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create directory '" + directory + "': " + ec.message());
  detail::ByteWriter w;
  w.put_i32(mesh.n_cells());
  w.put_u32(static_cast<std::uint32_t>(mesh.patches().size()));
  for (const auto& p : mesh.patches()) {
    w.put_u32(static_cast<std::uint32_t>(p.name.size()));
    w.put_chars(p.name);
    w.put_i32(p.start);
    w.put_i32(p.size);
  }
  write_array(directory, "patches", DType::bytes, std::span<const std::byte>(w.bytes()));
  std::vector<double> pts;
  pts.reserve(mesh.points().size() * 3);
  for (const auto& p : mesh.points()) {
    pts.push_back(p.x);
    pts.push_back(p.y);
    pts.push_back(p.z);
  }
  write_array(directory, "points", DType::f64, std::span<const double>(pts));
  std::vector<Label> faces;
  faces.reserve(mesh.faces().size() * 4);
  for (const auto& q : mesh.faces()) faces.insert(faces.end(), q.begin(), q.end());
  write_array(directory, "faces", DType::i32, std::span<const Label>(faces));
  write_array(directory, "owner", DType::i32, mesh.owner());
  write_array(directory, "neighbour", DType::i32, mesh.neighbour());
}

Label read_mesh_cell_count(const std::string& directory, MeshReadInfo* info) {
  return read_patch_table(directory, info).n_cells;
}

UnstructuredMesh read_mesh(const std::string& directory, MeshReadInfo* info) {
  return read_mesh_arrays(directory, read_patch_table(directory, info), info);
}

std::uint64_t mesh_directory_bytes(const std::string& directory) {
  std::uint64_t total = 0;
  for (const char* name : kFiles) total += detail::file_size(file_in(directory, name));
  return total;
}

StartupResult startup_with_runtime_refinement(const std::string& coarse_directory, int levels,
                                              const StartupOptions& options) {
  MeshReadInfo info;
  auto table = read_patch_table(coarse_directory, &info);
  const std::uint64_t target = refined_cell_count(static_cast<std::uint64_t>(table.n_cells), levels);
  if (target > options.max_cells) {
    throw ConfigError("refined mesh would have " + std::to_string(target) + " cells, above the budget of " +
                      std::to_string(options.max_cells));
  }
  auto coarse = read_mesh_arrays(coarse_directory, std::move(table), &info);
  return decompose(refine_uniform(coarse, levels), info.bytes_read, options);
}

StartupResult startup_from_full_mesh(const std::string& directory, const StartupOptions& options) {
  MeshReadInfo info;
  auto table = read_patch_table(directory, &info);
  if (static_cast<std::uint64_t>(table.n_cells) > options.max_cells) {
    throw ConfigError("mesh has " + std::to_string(table.n_cells) + " cells, above the budget");
  }
  auto mesh = read_mesh_arrays(directory, std::move(table), &info);
  return decompose(std::move(mesh), info.bytes_read, options);
}

void write_partition(const std::string& path, const TwoLevelPartition& p) {
  detail::ByteWriter w;
  for (Label c = 0; c < p.n_cells(); ++c) {
    w.put_u32(p.rank_of_cell[c]);
    w.put_u32(p.thread_of_cell[c]);
    w.put_u64(static_cast<std::uint64_t>(p.permutation[c]));
  }
  detail::write_file(path, w.bytes());
}

std::vector<PartitionRecord> read_partition(const std::string& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() % 16 != 0) throw FormatError(path + ": partition file length is not a multiple of 16");
  detail::ByteReader r(bytes, path);
  std::vector<PartitionRecord> out(bytes.size() / 16);
  for (auto& rec : out) {
    rec.rank = r.get_u32();
    rec.thread = r.get_u32();
    rec.new_index = r.get_u64();
  }
  return out;
}

}  // namespace mcflow
