#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "mcflow/common/error.hpp"
#include "mcflow/mesh/graph.hpp"
#include "mcflow/mesh/mesh.hpp"
#include "mcflow/partition/cuthill_mckee.hpp"
#include "mcflow/partition/partitioner.hpp"
#include "mcflow/partition/two_level.hpp"

namespace mcflow {
namespace {

std::vector<Label> random_permutation(Label n, std::uint64_t seed) {
  std::vector<Label> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// Smallest cut over every balanced 2-colouring of the 4x4x4 lattice is not
// enumerable; instead check every axis-aligned plane split and that the
// partitioner reaches the best of them.
std::int64_t best_plane_cut(int n) {
  return static_cast<std::int64_t>(n) * n;
}

TEST(PartitionGraph, SinglePart) {
  const auto g = mesh_to_graph(build_box_mesh(3, 3, 3));
  const auto part = partition_graph(g, 1);
  EXPECT_TRUE(std::all_of(part.begin(), part.end(), [](Label p) { return p == 0; }));
  EXPECT_EQ(edge_cut(g, part), 0);
}

TEST(PartitionGraph, BisectsLatticeAlongAPlane) {
  const auto g = mesh_to_graph(build_box_mesh(4, 4, 4));
  const auto part = partition_graph(g, 2, 1);
  EXPECT_EQ(std::count(part.begin(), part.end(), 0), 32);
  EXPECT_EQ(std::count(part.begin(), part.end(), 1), 32);
  EXPECT_EQ(edge_cut(g, part), best_plane_cut(4));
  EXPECT_EQ(edge_cut(g, part), 16);
}

TEST(PartitionGraph, TooManyParts) {
  const auto g = mesh_to_graph(build_box_mesh(2, 2, 1));
  EXPECT_THROW((void)partition_graph(g, 5), PartitionError);
  EXPECT_THROW((void)partition_graph(g, 0), PartitionError);
}

TEST(PartitionGraph, DeterministicForSeed) {
  const auto g = mesh_to_graph(renumber_cells(build_box_mesh(10, 9, 8), random_permutation(720, 4)));
  EXPECT_EQ(partition_graph(g, 7, 11), partition_graph(g, 7, 11));
}

TEST(PartitionGraph, BalanceOnDeskMeshes) {
  struct Case {
    int nx, ny, nz, parts;
  };
  for (const auto& c : {Case{10, 10, 10, 8}, Case{12, 10, 7, 5}, Case{16, 16, 16, 16}, Case{20, 20, 4, 3}}) {
    const auto mesh = build_box_mesh(c.nx, c.ny, c.nz);
    const auto g = mesh_to_graph(mesh);
    const auto part = partition_graph(g, c.parts, 3);
    std::vector<int> sizes(static_cast<std::size_t>(c.parts), 0);
    for (Label p : part) {
      ASSERT_GE(p, 0);
      ASSERT_LT(p, c.parts);
      ++sizes[static_cast<std::size_t>(p)];
    }
    const double mean = static_cast<double>(mesh.n_cells()) / c.parts;
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) / mean, 1.05) << c.nx << "x" << c.ny << "x" << c.nz;
  }
}

TEST(PartitionGraph, CutInvariantUnderPartRelabelling) {
  const auto g = mesh_to_graph(build_box_mesh(6, 6, 6));
  auto part = partition_graph(g, 4, 2);
  const auto cut = edge_cut(g, part);
  for (Label& p : part) p = 3 - p;
  EXPECT_EQ(edge_cut(g, part), cut);
}

TEST(CuthillMckee, PathGraph) {
  // Path 0-1-2-3 presented with nodes labelled (3,1,0,2) along the path.
  const std::vector<std::pair<Label, Label>> edges{{3, 1}, {1, 0}, {0, 2}};
  const auto g = graph_from_edges(4, edges);
  const auto order = cuthill_mckee(g);
  EXPECT_EQ(bandwidth(g, order), 1);
  // Starts at the end node with the smaller index (2) and walks the path.
  EXPECT_EQ(order, (std::vector<Label>{1, 2, 0, 3}));
}

TEST(CuthillMckee, SingleNode) {
  const auto g = graph_from_edges(1, {});
  EXPECT_EQ(cuthill_mckee(g), std::vector<Label>{0});
}

TEST(CuthillMckee, ReducesBandwidthOfShuffledLattice) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto mesh = renumber_cells(build_box_mesh(4, 4, 1), random_permutation(16, seed));
    const auto g = mesh_to_graph(mesh);
    std::vector<Label> identity(16);
    std::iota(identity.begin(), identity.end(), 0);
    const auto order = cuthill_mckee(g);
    EXPECT_LE(bandwidth(g, order), bandwidth(g, identity)) << seed;
    EXPECT_LE(bandwidth(g, order), 5) << seed;
  }
}

TEST(CuthillMckee, DisconnectedComponentsOrderedBySmallestNode) {
  const std::vector<std::pair<Label, Label>> edges{{1, 3}, {0, 2}, {2, 4}};
  const auto g = graph_from_edges(5, edges);
  const auto order = cuthill_mckee(g);
  const auto inv = invert_permutation(order);
  // Component {0,2,4} first, then {1,3}.
  EXPECT_EQ(std::set<Label>(inv.begin(), inv.begin() + 3), (std::set<Label>{0, 2, 4}));
  EXPECT_EQ(std::set<Label>(inv.begin() + 3, inv.end()), (std::set<Label>{1, 3}));
}

TEST(TwoLevel, SinglePartIsPureCuthillMckee) {
  const auto mesh = renumber_cells(build_box_mesh(5, 4, 3), random_permutation(60, 9));
  const auto p = two_level_decompose(mesh, 1, 1);
  EXPECT_EQ(p.permutation, cuthill_mckee(mesh_to_graph(mesh)));
  const auto s = partition_stats(mesh, p);
  EXPECT_EQ(s.offdiag_fraction, 0.0);
  EXPECT_EQ(s.nonzero_block_count, 1);
}

TEST(TwoLevel, RangesContiguousAndBalanced) {
  const auto mesh = build_box_mesh(8, 8, 8);
  const auto p = two_level_decompose(mesh, 2, 4);
  EXPECT_NO_THROW(validate_partition(p));
  ASSERT_EQ(p.ranges.size(), 8u);
  Label next = 0;
  for (const auto& r : p.ranges) {
    EXPECT_EQ(r.begin, next);
    next = r.end;
    EXPECT_NEAR(r.size(), 64, 64 * 0.05);
  }
  EXPECT_EQ(next, 512);
  for (Label c = 0; c < mesh.n_cells(); ++c) {
    EXPECT_TRUE(p.ranges[static_cast<std::size_t>(p.part_of_cell(c))].contains(p.permutation[c]));
    EXPECT_EQ(p.inverse_permutation[p.permutation[c]], c);
  }
}

TEST(TwoLevel, RenumberingPreservesGraph) {
  const auto mesh = build_box_mesh(6, 5, 4);
  const auto p = two_level_decompose(mesh, 2, 3);
  const auto renumbered = apply_partition(mesh, p);
  const auto g0 = mesh_to_graph(mesh);
  const auto g1 = mesh_to_graph(renumbered);
  ASSERT_EQ(g0.n_edges(), g1.n_edges());
  for (Label v = 0; v < g0.n_nodes(); ++v) {
    std::vector<Label> mapped;
    for (Label u : g0.neighbours(v)) mapped.push_back(p.permutation[u]);
    std::sort(mapped.begin(), mapped.end());
    const auto nb = g1.neighbours(p.permutation[v]);
    EXPECT_EQ(mapped, std::vector<Label>(nb.begin(), nb.end()));
  }
}

TEST(TwoLevel, BeatsIndexQuartersOnSmallBox) {
  const auto mesh = build_box_mesh(4, 4, 4);
  const auto opt = partition_stats(mesh, two_level_decompose(mesh, 1, 4));
  const auto naive = partition_stats(mesh, index_block_decompose(mesh, 1, 4));
  EXPECT_LT(opt.offdiag_fraction, naive.offdiag_fraction);
}

TEST(TwoLevel, LexicographicBoxNearOptimalCut) {
  // Index quarters of a lexicographic 8^3 box are z-slabs: 3 planes of 64
  // faces. No 4-way balanced split of this lattice cuts fewer than 2 planes
  // (128 faces), so the attainable ratio is 2/3.
  const auto mesh = build_box_mesh(8, 8, 8);
  const auto opt = partition_stats(mesh, two_level_decompose(mesh, 1, 4));
  const auto naive = partition_stats(mesh, index_block_decompose(mesh, 1, 4));
  EXPECT_EQ(naive.edge_cut, 192);
  EXPECT_LE(opt.edge_cut, 144);
  EXPECT_LE(opt.cells_per_part.max / opt.cells_per_part.mean, 1.05);
}

TEST(TwoLevel, ShuffledNumberingHalvesOffdiagonal) {
  const auto base = build_box_mesh(8, 8, 8);
  const auto mesh = renumber_cells(base, random_permutation(base.n_cells(), 5));
  const auto opt = partition_stats(mesh, two_level_decompose(mesh, 1, 4));
  const auto naive = partition_stats(mesh, index_block_decompose(mesh, 1, 4));
  EXPECT_LE(opt.offdiag_fraction, 0.5 * naive.offdiag_fraction);
}

TEST(PartitionStats, CountsMatchDirectEnumeration) {
  const auto mesh = build_box_mesh(5, 5, 5);
  const auto p = two_level_decompose(mesh, 2, 2);
  const auto s = partition_stats(mesh, p);
  std::int64_t cut = 0, rank_cut = 0;
  std::set<std::pair<Label, Label>> blocks;
  for (Label c = 0; c < mesh.n_cells(); ++c) blocks.insert({p.part_of_cell(c), p.part_of_cell(c)});
  for (Label f = 0; f < mesh.n_internal_faces(); ++f) {
    const Label a = p.part_of_cell(mesh.owner()[f]), b = p.part_of_cell(mesh.neighbour()[f]);
    blocks.insert({a, b});
    blocks.insert({b, a});
    if (a != b) ++cut;
    if (p.rank_of_cell[mesh.owner()[f]] != p.rank_of_cell[mesh.neighbour()[f]]) ++rank_cut;
  }
  EXPECT_EQ(s.edge_cut, cut);
  EXPECT_EQ(s.rank_edge_cut, rank_cut);
  EXPECT_EQ(s.nonzero_block_count, static_cast<std::int64_t>(blocks.size()));
  const double nnz = mesh.n_cells() + 2.0 * mesh.n_internal_faces();
  EXPECT_DOUBLE_EQ(s.offdiag_fraction, 2.0 * cut / nnz);
  EXPECT_GE(s.cells_per_part.max, s.cells_per_part.mean);
  EXPECT_GE(s.cells_per_part.mean, s.cells_per_part.min);
}

TEST(TwoLevel, RejectsTooManyParts) {
  EXPECT_THROW(two_level_decompose(build_box_mesh(2, 2, 1), 2, 3), PartitionError);
}

}  // namespace
}  // namespace mcflow
