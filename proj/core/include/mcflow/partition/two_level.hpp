#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcflow/common/thread_pool.hpp"
#include "mcflow/mesh/mesh.hpp"
#include "mcflow/partition/partitioner.hpp"

namespace mcflow {

/// Rank and thread assignment of every cell plus the renumbering that makes
/// each (rank, thread) region a contiguous index range.
///
/// `rank_of_cell`, `thread_of_cell` and `permutation` are indexed by the
/// original cell id; `ranges` is in the new numbering, ordered by
/// (rank, thread) with index rank * n_threads + thread.
struct TwoLevelPartition {
  Label n_ranks = 1;
  Label n_threads = 1;
  std::vector<std::uint32_t> rank_of_cell;
  std::vector<std::uint32_t> thread_of_cell;
  std::vector<Label> permutation;
  std::vector<Label> inverse_permutation;
  std::vector<CellRange> ranges;

  [[nodiscard]] Label n_cells() const noexcept { return static_cast<Label>(permutation.size()); }
  [[nodiscard]] Label n_parts() const noexcept { return n_ranks * n_threads; }
  [[nodiscard]] const CellRange& range(Label rank, Label thread) const {
    return ranges[static_cast<std::size_t>(rank * n_threads + thread)];
  }
  /// Part (rank * n_threads + thread) of an original cell.
  [[nodiscard]] Label part_of_cell(Label cell) const {
    return static_cast<Label>(rank_of_cell[cell]) * n_threads + static_cast<Label>(thread_of_cell[cell]);
  }
};

struct DecomposeOptions {
  std::uint64_t seed = 1;
  /// Defaults to MultilevelBisection.
  const GraphPartitioner* partitioner = nullptr;
  /// Optional pool used to split ranks into thread regions concurrently.
  ThreadPool* pool = nullptr;
};

/// Rank-level partition of the cell graph, thread-level partition of each
/// rank's induced subgraph, then Cuthill-McKee inside each (rank, thread)
/// region, composed into one global permutation.
TwoLevelPartition two_level_decompose(const UnstructuredMesh& mesh, Label n_ranks, Label n_threads,
                                      const DecomposeOptions& options = {});

/// Baseline: equal runs of original indices, identity permutation.
TwoLevelPartition index_block_decompose(const UnstructuredMesh& mesh, Label n_ranks, Label n_threads);

/// Checks the bijection, assignment and contiguity invariants; throws
/// PartitionError describing the first violation.
void validate_partition(const TwoLevelPartition& partition);

/// The mesh with cells renamed by the partition's permutation.
UnstructuredMesh apply_partition(const UnstructuredMesh& mesh, const TwoLevelPartition& partition);

struct CountSummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double stddev = 0.0;
};

struct PartitionStats {
  /// Over all rank * thread regions.
  CountSummary cells_per_part;
  /// Internal faces between different regions.
  std::int64_t edge_cut = 0;
  /// Internal faces between different ranks (the halo).
  std::int64_t rank_edge_cut = 0;
  /// Nonzeros outside the diagonal blocks over all nonzeros.
  double offdiag_fraction = 0.0;
  /// Non-empty blocks of the (ranks * threads)^2 block grid.
  std::int64_t nonzero_block_count = 0;

  [[nodiscard]] double balance() const { return mean_balance(cells_per_part); }
  static double mean_balance(const CountSummary& s) { return s.mean > 0.0 ? s.max / s.mean : 0.0; }
};

/// Statistics of the block structure induced by `partition` on `mesh`
/// (original numbering). Nonzeros count one per cell and two per internal face.
PartitionStats partition_stats(const UnstructuredMesh& mesh, const TwoLevelPartition& partition);

}  // namespace mcflow
