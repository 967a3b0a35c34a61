#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcflow/mesh/mesh.hpp"
#include "mcflow/partition/two_level.hpp"

namespace mcflow {

/// A mesh directory holds one single-rank collated file (plus index) per
/// array: points (f64 x3), faces (i32 x4), owner, neighbour (i32) and
/// patches (bytes: i32 n_cells, u32 patch count, per patch u32 name length,
/// name, i32 start, i32 size).
void write_mesh(const std::string& directory, const UnstructuredMesh& mesh);

struct MeshReadInfo {
  std::uint64_t bytes_read = 0;
};

UnstructuredMesh read_mesh(const std::string& directory, MeshReadInfo* info = nullptr);

/// Cell count recorded in a mesh directory (reads only the patches file).
Label read_mesh_cell_count(const std::string& directory, MeshReadInfo* info = nullptr);

/// Sum of the sizes of the mesh files in a directory.
std::uint64_t mesh_directory_bytes(const std::string& directory);

struct StartupOptions {
  Label n_ranks = 1;
  Label n_threads = 1;
  std::uint64_t seed = 1;
  /// Refuse to materialise meshes with more cells than this.
  std::uint64_t max_cells = 50'000'000;
};

struct StartupResult {
  UnstructuredMesh mesh;  // original (unrenumbered) cell order
  TwoLevelPartition partition;
  std::uint64_t bytes_read = 0;
  std::uint64_t cell_count = 0;
};

/// Reads a coarse mesh, refines it in memory and decomposes the result.
StartupResult startup_with_runtime_refinement(const std::string& coarse_directory, int levels,
                                              const StartupOptions& options = {});

/// Reads an already refined mesh and decomposes it.
StartupResult startup_from_full_mesh(const std::string& directory, const StartupOptions& options = {});

/// Flat partition export: per cell (original order) u32 rank, u32 thread,
/// u64 new index, little-endian, no header.
void write_partition(const std::string& path, const TwoLevelPartition& partition);

struct PartitionRecord {
  std::uint32_t rank = 0;
  std::uint32_t thread = 0;
  std::uint64_t new_index = 0;
  friend bool operator==(const PartitionRecord&, const PartitionRecord&) = default;
};

std::vector<PartitionRecord> read_partition(const std::string& path);

}  // namespace mcflow
