#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcflow/mesh/graph.hpp"

namespace mcflow {

/// Assigns every graph node to a part in [0, n_parts).
class GraphPartitioner {
 public:
  virtual ~GraphPartitioner() = default;
  [[nodiscard]] virtual std::vector<Label> partition(const CellGraph& graph, Label n_parts,
                                                     std::uint64_t seed) const = 0;
};

struct MultilevelOptions {
  /// Stop coarsening below this many nodes.
  Label coarsen_to = 48;
  /// Allowed deviation of each bisection from its target weight, as a
  /// fraction of the total weight being split (at least one vertex weight).
  double bisection_tolerance = 0.004;
  /// Greedy-growing attempts on the coarsest graph; the best cut wins.
  int initial_trials = 10;
  /// Upper bound on refinement passes per level.
  int refine_passes = 10;
};

/// Multilevel recursive bisection: heavy-edge matching coarsening, greedy
/// graph-growing initial bisection, and Fiduccia-Mattheyses boundary
/// refinement under a balance window at every uncoarsening level. Results
/// depend only on the graph, the part count and the seed.
class MultilevelBisection final : public GraphPartitioner {
 public:
  explicit MultilevelBisection(MultilevelOptions options = {}) : options_(options) {}
  [[nodiscard]] std::vector<Label> partition(const CellGraph& graph, Label n_parts,
                                             std::uint64_t seed) const override;

  /// Two-way split with part 0 receiving `fraction` of the vertex weight and
  /// at least min0 nodes (and part 1 at least min1 nodes). Returns 0/1 per node.
  [[nodiscard]] std::vector<std::uint8_t> bisect(const CellGraph& graph, double fraction, Label min0, Label min1,
                                         std::uint64_t seed) const;

 private:
  MultilevelOptions options_;
};

/// Splits nodes into n_parts runs of consecutive indices with sizes differing
/// by at most one (the unoptimized baseline).
class IndexBlockPartitioner final : public GraphPartitioner {
 public:
  [[nodiscard]] std::vector<Label> partition(const CellGraph& graph, Label n_parts,
                                             std::uint64_t seed) const override;
};

/// Default partitioner (MultilevelBisection with default options).
std::vector<Label> partition_graph(const CellGraph& graph, Label n_parts, std::uint64_t seed = 1);

/// Sum of edge weights whose endpoints lie in different parts.
std::int64_t edge_cut(const CellGraph& graph, std::span<const Label> part);

}  // namespace mcflow
