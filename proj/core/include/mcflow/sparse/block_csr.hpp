#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mcflow/common/thread_pool.hpp"
#include "mcflow/common/types.hpp"
#include "mcflow/partition/two_level.hpp"
#include "mcflow/sparse/ldu_matrix.hpp"

namespace mcflow {

struct BlockSystem;

/// Read-only view of one CSR sub-matrix. Row offsets are local to the block
/// (row 0 is rows.begin); columns are global indices in ascending order.
struct CsrBlockView {
  CellRange rows;
  CellRange cols;
  std::span<const Label> row_offsets;
  std::span<const Label> columns;
  std::span<const double> values;

  [[nodiscard]] Label nnz() const noexcept { return static_cast<Label>(values.size()); }
};

/// Matrix split into a t x t grid of CSR blocks aligned with contiguous row
/// ranges. Only non-empty blocks are stored. All values live in one buffer
/// ordered by block row, then block column, then row, then column.
class BlockCsrMatrix {
 public:
  struct Block {
    Label row_block = 0;
    Label col_block = 0;
    std::size_t value_offset = 0;
    /// rows.size() + 1 entries, relative to value_offset.
    std::vector<Label> row_offsets;
  };

  BlockCsrMatrix() = default;

  [[nodiscard]] Label n_rows() const noexcept { return n_; }
  [[nodiscard]] Label threads() const noexcept { return static_cast<Label>(ranges_.size()); }
  [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const CellRange> row_ranges() const noexcept { return ranges_; }
  [[nodiscard]] std::size_t nonzero_block_count() const noexcept { return blocks_.size(); }
  [[nodiscard]] std::span<const Block> blocks() const noexcept { return blocks_; }
  /// Indices into blocks() of the non-empty blocks of block row i, by column.
  [[nodiscard]] std::span<const Label> blocks_in_row(Label i) const;
  [[nodiscard]] std::optional<CsrBlockView> block(Label i, Label j) const;

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const Label> columns() const noexcept { return columns_; }
  /// Position of entry (r, r) in values().
  [[nodiscard]] std::span<const Label> diagonal_positions() const noexcept { return diag_pos_; }
  [[nodiscard]] double diagonal(Label r) const { return values_[static_cast<std::size_t>(diag_pos_[r])]; }
  [[nodiscard]] std::uint64_t pattern_fingerprint() const noexcept { return fingerprint_; }

 private:
  friend BlockSystem build_block_map(const LduAddressing&, std::span<const CellRange>);

  Label n_ = 0;
  std::vector<CellRange> ranges_;
  std::vector<Block> blocks_;
  std::vector<Label> block_row_offsets_;  // t + 1
  std::vector<Label> block_row_members_;
  std::vector<Label> block_of_cell_pair_;  // t * t, -1 for empty
  std::vector<double> values_;
  std::vector<Label> columns_;
  std::vector<Label> diag_pos_;
  std::uint64_t fingerprint_ = 0;
};

/// Static positional map from LDU slots to block-CSR value positions.
/// Slot order: diag[0..n), lower[0..F), upper[0..F).
class LduBlockMap {
 public:
  struct Target {
    Label block = 0;
    Label offset = 0;
  };

  [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }
  [[nodiscard]] std::span<const Label> positions() const noexcept { return positions_; }
  [[nodiscard]] Target target(std::size_t slot) const;
  [[nodiscard]] std::uint64_t pattern_fingerprint() const noexcept { return fingerprint_; }
  [[nodiscard]] Label n_cells() const noexcept { return n_cells_; }
  [[nodiscard]] Label n_faces() const noexcept { return n_faces_; }

 private:
  friend BlockSystem build_block_map(const LduAddressing&, std::span<const CellRange>);

  Label n_cells_ = 0;
  Label n_faces_ = 0;
  std::vector<Label> positions_;
  std::vector<std::size_t> block_offsets_;  // value_offset of each block, ascending
  std::uint64_t fingerprint_ = 0;
};

struct BlockSystem {
  BlockCsrMatrix matrix;
  LduBlockMap map;
};

/// Builds the zero-valued block structure and the slot map for a sparsity
/// pattern. `ranges` must be contiguous, ascending and cover [0, n_cells).
BlockSystem build_block_map(const LduAddressing& addressing, std::span<const CellRange> ranges);

/// Same, for a mesh already renumbered by `partition`; one block row per
/// (rank, thread) region.
BlockSystem build_block_map(const UnstructuredMesh& renumbered_mesh, const TwoLevelPartition& partition);

/// `count` equal runs of indices over [0, n).
std::vector<CellRange> even_ranges(Label n, Label count);

/// Copies LDU values into `dst` through `map`. Throws StaleMapError when the
/// matrix, map and destination do not share one sparsity pattern.
void refresh_values(const LduMatrix& ldu, const LduBlockMap& map, BlockCsrMatrix& dst, ThreadPool* pool = nullptr);

std::vector<double> to_dense(const BlockCsrMatrix& matrix);

}  // namespace mcflow
