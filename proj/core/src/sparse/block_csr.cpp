#include "mcflow/sparse/block_csr.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "mcflow/common/error.hpp"

namespace mcflow {

std::span<const Label> BlockCsrMatrix::blocks_in_row(Label i) const {
  const auto b = static_cast<std::size_t>(block_row_offsets_[i]);
  const auto e = static_cast<std::size_t>(block_row_offsets_[i + 1]);
  return std::span<const Label>(block_row_members_).subspan(b, e - b);
}

std::optional<CsrBlockView> BlockCsrMatrix::block(Label i, Label j) const {
  const Label t = threads();
  if (i < 0 || j < 0 || i >= t || j >= t) throw DimensionError("block index out of range");
  const Label id = block_of_cell_pair_[static_cast<std::size_t>(i * t + j)];
  if (id < 0) return std::nullopt;
  const Block& b = blocks_[static_cast<std::size_t>(id)];
  const auto nnz = static_cast<std::size_t>(b.row_offsets.back());
  return CsrBlockView{ranges_[i], ranges_[j], b.row_offsets,
                      std::span<const Label>(columns_).subspan(b.value_offset, nnz),
                      std::span<const double>(values_).subspan(b.value_offset, nnz)};
}

LduBlockMap::Target LduBlockMap::target(std::size_t slot) const {
  const auto pos = static_cast<std::size_t>(positions_.at(slot));
  const auto it = std::upper_bound(block_offsets_.begin(), block_offsets_.end(), pos);
  const auto block = static_cast<std::size_t>(it - block_offsets_.begin()) - 1;
  return {static_cast<Label>(block), static_cast<Label>(pos - block_offsets_[block])};
}

std::vector<CellRange> even_ranges(Label n, Label count) {
  if (count < 1) throw DimensionError("range count must be positive");
  std::vector<CellRange> r(static_cast<std::size_t>(count));
  for (Label i = 0; i < count; ++i) {
    r[i].begin = static_cast<Label>(static_cast<std::int64_t>(n) * i / count);
    r[i].end = static_cast<Label>(static_cast<std::int64_t>(n) * (i + 1) / count);
  }
  return r;
}

BlockSystem build_block_map(const LduAddressing& addr, std::span<const CellRange> ranges) {
  const Label n = addr.n_cells;
  const Label nf = addr.n_faces();
  const auto t = static_cast<Label>(ranges.size());
  if (t < 1) throw DimensionError("at least one row range is required");
  Label expect = 0;
  for (const auto& r : ranges) {
    if (r.begin != expect || r.end < r.begin) throw DimensionError("row ranges must be contiguous and ascending");
    expect = r.end;
  }
  if (expect != n) {
    throw DimensionError("row ranges cover " + std::to_string(expect) + " rows, matrix has " + std::to_string(n));
  }
  if (addr.nnz() > std::numeric_limits<Label>::max()) throw DimensionError("too many nonzeros");

  std::vector<Label> range_of(static_cast<std::size_t>(n));
  for (Label i = 0; i < t; ++i) {
    for (Label c = ranges[i].begin; c < ranges[i].end; ++c) range_of[c] = i;
  }

  // Global CSR of (column, slot) pairs, columns ascending in every row.
  std::vector<Label> row_ptr(static_cast<std::size_t>(n) + 1, 1);
  row_ptr[0] = 0;
  for (Label f = 0; f < nf; ++f) {
    ++row_ptr[addr.owner[f] + 1];
    ++row_ptr[addr.neighbour[f] + 1];
  }
  for (Label r = 0; r < n; ++r) row_ptr[r + 1] += row_ptr[r];
  const auto nnz = static_cast<std::size_t>(row_ptr[n]);
  std::vector<std::pair<Label, Label>> entries(nnz);
  {
    std::vector<Label> fill(row_ptr.begin(), row_ptr.end() - 1);
    for (Label r = 0; r < n; ++r) entries[fill[r]++] = {r, r};
    for (Label f = 0; f < nf; ++f) {
      const Label o = addr.owner[f], nb = addr.neighbour[f];
      entries[fill[nb]++] = {o, n + f};       // lower
      entries[fill[o]++] = {nb, n + nf + f};  // upper
    }
  }
  for (Label r = 0; r < n; ++r) std::sort(entries.begin() + row_ptr[r], entries.begin() + row_ptr[r + 1]);

  BlockSystem sys;
  BlockCsrMatrix& m = sys.matrix;
  LduBlockMap& map = sys.map;
  m.n_ = n;
  m.ranges_.assign(ranges.begin(), ranges.end());
  m.fingerprint_ = addr.fingerprint;
  m.block_of_cell_pair_.assign(static_cast<std::size_t>(t) * static_cast<std::size_t>(t), -1);
  m.block_row_offsets_.assign(static_cast<std::size_t>(t) + 1, 0);
  m.values_.assign(nnz, 0.0);
  m.columns_.resize(nnz);
  m.diag_pos_.resize(static_cast<std::size_t>(n));
  map.n_cells_ = n;
  map.n_faces_ = nf;
  map.fingerprint_ = addr.fingerprint;
  map.positions_.resize(nnz);

  std::vector<Label> cursor(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<char> present(static_cast<std::size_t>(t));
  std::size_t pos = 0;
  for (Label i = 0; i < t; ++i) {
    const CellRange rows = ranges[i];
    std::fill(present.begin(), present.end(), 0);
    for (Label r = rows.begin; r < rows.end; ++r) {
      for (Label k = row_ptr[r]; k < row_ptr[r + 1]; ++k) present[static_cast<std::size_t>(range_of[entries[k].first])] = 1;
    }
    for (Label j = 0; j < t; ++j) {
      if (present[static_cast<std::size_t>(j)] == 0) continue;
      BlockCsrMatrix::Block b;
      b.row_block = i;
      b.col_block = j;
      b.value_offset = pos;
      b.row_offsets.resize(static_cast<std::size_t>(rows.size()) + 1, 0);
      for (Label r = rows.begin; r < rows.end; ++r) {
        Label& k = cursor[r];
        while (k < row_ptr[r + 1] && entries[k].first < ranges[j].end) {
          const auto [col, slot] = entries[k];
          m.columns_[pos] = col;
          map.positions_[static_cast<std::size_t>(slot)] = static_cast<Label>(pos);
          if (col == r) m.diag_pos_[r] = static_cast<Label>(pos);
          ++pos;
          ++k;
        }
        b.row_offsets[static_cast<std::size_t>(r - rows.begin) + 1] = static_cast<Label>(pos - b.value_offset);
      }
      const auto id = static_cast<Label>(m.blocks_.size());
      m.block_of_cell_pair_[static_cast<std::size_t>(i * t + j)] = id;
      m.block_row_members_.push_back(id);
      map.block_offsets_.push_back(b.value_offset);
      m.blocks_.push_back(std::move(b));
    }
    m.block_row_offsets_[static_cast<std::size_t>(i) + 1] = static_cast<Label>(m.block_row_members_.size());
  }
  return sys;
}

BlockSystem build_block_map(const UnstructuredMesh& renumbered_mesh, const TwoLevelPartition& partition) {
  if (partition.n_cells() != renumbered_mesh.n_cells()) {
    throw DimensionError("partition has " + std::to_string(partition.n_cells()) + " cells, mesh has " +
                         std::to_string(renumbered_mesh.n_cells()));
  }
  return build_block_map(*LduAddressing::from_mesh(renumbered_mesh), partition.ranges);
}

void refresh_values(const LduMatrix& ldu, const LduBlockMap& map, BlockCsrMatrix& dst, ThreadPool* pool) {
  const auto& addr = ldu.addressing();
  if (addr.fingerprint != map.pattern_fingerprint() || dst.pattern_fingerprint() != map.pattern_fingerprint() ||
      addr.n_cells != map.n_cells() || addr.n_faces() != map.n_faces() || dst.nnz() != map.size()) {
    throw StaleMapError("block map was built for a different sparsity pattern");
  }
  const auto n = static_cast<std::size_t>(addr.n_cells);
  const auto nf = static_cast<std::size_t>(addr.n_faces());
  const Label* pos = map.positions().data();
  double* out = dst.values().data();
  const double* diag = ldu.diag().data();
  const double* lower = ldu.lower().data();
  const double* upper = ldu.upper().data();

  auto copy_range = [&](std::size_t b, std::size_t e) {
    // Three source arrays laid end to end in slot order.
    for (std::size_t s = b; s < std::min(e, n); ++s) out[pos[s]] = diag[s];
    for (std::size_t s = std::max(b, n); s < std::min(e, n + nf); ++s) out[pos[s]] = lower[s - n];
    for (std::size_t s = std::max(b, n + nf); s < e; ++s) out[pos[s]] = upper[s - n - nf];
  };
  const std::size_t total = map.size();
  if (pool == nullptr || pool->size() == 1) {
    copy_range(0, total);
    return;
  }
  const auto w = static_cast<std::size_t>(pool->size());
  pool->run([&](int id) {
    const auto i = static_cast<std::size_t>(id);
    copy_range(total * i / w, total * (i + 1) / w);
  });
}

std::vector<double> to_dense(const BlockCsrMatrix& m) {
  const auto n = static_cast<std::size_t>(m.n_rows());
  std::vector<double> d(n * n, 0.0);
  for (const auto& b : m.blocks()) {
    const CellRange rows = m.row_ranges()[b.row_block];
    for (Label r = rows.begin; r < rows.end; ++r) {
      const auto lr = static_cast<std::size_t>(r - rows.begin);
      for (Label k = b.row_offsets[lr]; k < b.row_offsets[lr + 1]; ++k) {
        const std::size_t p = b.value_offset + static_cast<std::size_t>(k);
        d[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(m.columns()[p])] = m.values()[p];
      }
    }
  }
  return d;
}

}  // namespace mcflow
