#include "mcflow/partition/two_level.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mcflow/common/error.hpp"
#include "mcflow/partition/cuthill_mckee.hpp"

namespace mcflow {

namespace {

std::vector<std::vector<Label>> members_by_part(std::span<const Label> part, Label n_parts) {
  std::vector<std::vector<Label>> out(static_cast<std::size_t>(n_parts));
  for (std::size_t v = 0; v < part.size(); ++v) out[part[v]].push_back(static_cast<Label>(v));
  return out;
}

void check_counts(const UnstructuredMesh& mesh, Label n_ranks, Label n_threads) {
  if (n_ranks < 1 || n_threads < 1) throw PartitionError("ranks and threads must be at least 1");
  if (static_cast<std::int64_t>(n_ranks) * n_threads > mesh.n_cells()) {
    throw PartitionError(std::to_string(n_ranks) + " ranks x " + std::to_string(n_threads) +
                         " threads exceeds the cell count " + std::to_string(mesh.n_cells()));
  }
}

}  // namespace

TwoLevelPartition two_level_decompose(const UnstructuredMesh& mesh, Label n_ranks, Label n_threads,
                                      const DecomposeOptions& options) {
  check_counts(mesh, n_ranks, n_threads);
  const MultilevelBisection fallback;
  const GraphPartitioner& partitioner = options.partitioner ? *options.partitioner : fallback;
  const CellGraph graph = mesh_to_graph(mesh);
  const Label n = mesh.n_cells();

  const std::vector<Label> rank_part =
      n_ranks == 1 ? std::vector<Label>(static_cast<std::size_t>(n), 0) : partitioner.partition(graph, n_ranks, options.seed);
  const auto rank_cells = members_by_part(rank_part, n_ranks);

  TwoLevelPartition p;
  p.n_ranks = n_ranks;
  p.n_threads = n_threads;
  p.rank_of_cell.resize(static_cast<std::size_t>(n));
  p.thread_of_cell.resize(static_cast<std::size_t>(n));
  p.permutation.assign(static_cast<std::size_t>(n), -1);

  // Thread regions of each rank, then CM inside each region. Ranks are
  // independent, so they may run concurrently.
  std::vector<std::vector<std::vector<Label>>> regions(static_cast<std::size_t>(n_ranks));
  std::vector<std::vector<std::vector<Label>>> local_order(static_cast<std::size_t>(n_ranks));
  for_each_worker(options.pool, n_ranks, [&](int r) {
    const auto& cells = rank_cells[static_cast<std::size_t>(r)];
    if (static_cast<Label>(cells.size()) < n_threads) {
      throw PartitionError("rank " + std::to_string(r) + " holds fewer cells than threads");
    }
    const CellGraph sub = induced_subgraph(graph, cells);
    const std::vector<Label> thread_part =
        n_threads == 1 ? std::vector<Label>(cells.size(), 0)
                       : partitioner.partition(sub, n_threads, options.seed * 1000003ull + static_cast<std::uint64_t>(r) + 1);
    auto& reg = regions[static_cast<std::size_t>(r)];
    reg.assign(static_cast<std::size_t>(n_threads), {});
    for (std::size_t i = 0; i < cells.size(); ++i) reg[thread_part[i]].push_back(cells[i]);
    auto& orders = local_order[static_cast<std::size_t>(r)];
    orders.resize(static_cast<std::size_t>(n_threads));
    for (Label j = 0; j < n_threads; ++j) {
      orders[j] = cuthill_mckee(induced_subgraph(graph, reg[j]));
    }
  });

  Label offset = 0;
  for (Label r = 0; r < n_ranks; ++r) {
    for (Label j = 0; j < n_threads; ++j) {
      const auto& cells = regions[r][j];
      if (cells.empty()) throw PartitionError("empty thread region produced by partitioner");
      const auto& order = local_order[r][j];
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const Label c = cells[i];
        p.rank_of_cell[c] = static_cast<std::uint32_t>(r);
        p.thread_of_cell[c] = static_cast<std::uint32_t>(j);
        p.permutation[c] = offset + order[i];
      }
      p.ranges.push_back({offset, offset + static_cast<Label>(cells.size())});
      offset += static_cast<Label>(cells.size());
    }
  }
  p.inverse_permutation = invert_permutation(p.permutation);
  return p;
}

TwoLevelPartition index_block_decompose(const UnstructuredMesh& mesh, Label n_ranks, Label n_threads) {
  check_counts(mesh, n_ranks, n_threads);
  const Label n = mesh.n_cells();
  const Label parts = n_ranks * n_threads;
  TwoLevelPartition p;
  p.n_ranks = n_ranks;
  p.n_threads = n_threads;
  p.rank_of_cell.resize(static_cast<std::size_t>(n));
  p.thread_of_cell.resize(static_cast<std::size_t>(n));
  p.permutation.resize(static_cast<std::size_t>(n));
  for (Label c = 0; c < n; ++c) {
    const auto part = static_cast<Label>((static_cast<std::int64_t>(c) * parts) / n);
    p.rank_of_cell[c] = static_cast<std::uint32_t>(part / n_threads);
    p.thread_of_cell[c] = static_cast<std::uint32_t>(part % n_threads);
    p.permutation[c] = c;
  }
  p.inverse_permutation = p.permutation;
  for (Label k = 0; k < parts; ++k) {
    const auto begin = static_cast<Label>((static_cast<std::int64_t>(k) * n + parts - 1) / parts);
    const auto end = static_cast<Label>((static_cast<std::int64_t>(k + 1) * n + parts - 1) / parts);
    p.ranges.push_back({begin, end});
  }
  return p;
}

void validate_partition(const TwoLevelPartition& p) {
  const Label n = p.n_cells();
  if (p.rank_of_cell.size() != static_cast<std::size_t>(n) || p.thread_of_cell.size() != static_cast<std::size_t>(n) ||
      p.inverse_permutation.size() != static_cast<std::size_t>(n)) {
    throw PartitionError("partition arrays have inconsistent lengths");
  }
  if (p.ranges.size() != static_cast<std::size_t>(p.n_parts())) throw PartitionError("range count differs from parts");
  const auto inv = invert_permutation(p.permutation);
  if (inv != p.inverse_permutation) throw PartitionError("inverse permutation mismatch");
  Label expect = 0;
  for (const auto& r : p.ranges) {
    if (r.begin != expect || r.end < r.begin) throw PartitionError("ranges are not contiguous and ordered");
    expect = r.end;
  }
  if (expect != n) throw PartitionError("ranges do not cover all cells");
  for (Label c = 0; c < n; ++c) {
    if (p.rank_of_cell[c] >= static_cast<std::uint32_t>(p.n_ranks) ||
        p.thread_of_cell[c] >= static_cast<std::uint32_t>(p.n_threads)) {
      throw PartitionError("cell " + std::to_string(c) + " has an invalid assignment");
    }
    if (!p.ranges[static_cast<std::size_t>(p.part_of_cell(c))].contains(p.permutation[c])) {
      throw PartitionError("cell " + std::to_string(c) + " is outside its region's range");
    }
  }
}

UnstructuredMesh apply_partition(const UnstructuredMesh& mesh, const TwoLevelPartition& partition) {
  if (partition.n_cells() != mesh.n_cells()) throw DimensionError("partition and mesh sizes differ");
  return renumber_cells(mesh, partition.permutation);
}

PartitionStats partition_stats(const UnstructuredMesh& mesh, const TwoLevelPartition& partition) {
  if (partition.n_cells() != mesh.n_cells()) throw DimensionError("partition and mesh sizes differ");
  const Label parts = partition.n_parts();
  std::vector<double> counts(static_cast<std::size_t>(parts), 0.0);
  for (Label c = 0; c < mesh.n_cells(); ++c) counts[partition.part_of_cell(c)] += 1.0;

  PartitionStats s;
  s.cells_per_part.min = *std::min_element(counts.begin(), counts.end());
  s.cells_per_part.max = *std::max_element(counts.begin(), counts.end());
  double sum = 0.0;
  for (double v : counts) sum += v;
  s.cells_per_part.mean = sum / parts;
  double var = 0.0;
  for (double v : counts) var += (v - s.cells_per_part.mean) * (v - s.cells_per_part.mean);
  s.cells_per_part.stddev = std::sqrt(var / parts);

  std::set<std::pair<Label, Label>> blocks;
  for (Label k = 0; k < parts; ++k) {
    if (counts[k] > 0) blocks.insert({k, k});
  }
  for (Label f = 0; f < mesh.n_internal_faces(); ++f) {
    const Label a = partition.part_of_cell(mesh.owner()[f]);
    const Label b = partition.part_of_cell(mesh.neighbour()[f]);
    if (a != b) {
      ++s.edge_cut;
      blocks.insert({a, b});
      blocks.insert({b, a});
    }
    if (partition.rank_of_cell[mesh.owner()[f]] != partition.rank_of_cell[mesh.neighbour()[f]]) ++s.rank_edge_cut;
  }
  const double nnz = static_cast<double>(mesh.n_cells()) + 2.0 * mesh.n_internal_faces();
  s.offdiag_fraction = 2.0 * static_cast<double>(s.edge_cut) / nnz;
  s.nonzero_block_count = static_cast<std::int64_t>(blocks.size());
  return s;
}

}  // namespace mcflow
