#pragma once

#include <span>
#include <vector>

#include "mcflow/mesh/mesh.hpp"

namespace mcflow {

/// Undirected graph in CSR form. Neighbour lists are sorted ascending and
/// contain no self loops or duplicates. Empty weight vectors mean unit weights.
struct CellGraph {
  std::vector<Label> offsets{0};
  std::vector<Label> adjacency;
  std::vector<Label> edge_weights;
  std::vector<Label> vertex_weights;

  [[nodiscard]] Label n_nodes() const noexcept { return static_cast<Label>(offsets.size()) - 1; }
  [[nodiscard]] std::size_t n_edges() const noexcept { return adjacency.size() / 2; }
  [[nodiscard]] std::span<const Label> neighbours(Label v) const {
    return std::span<const Label>(adjacency).subspan(static_cast<std::size_t>(offsets[v]),
                                                     static_cast<std::size_t>(offsets[v + 1] - offsets[v]));
  }
  [[nodiscard]] Label degree(Label v) const { return offsets[v + 1] - offsets[v]; }
  [[nodiscard]] Label edge_weight(std::size_t slot) const { return edge_weights.empty() ? 1 : edge_weights[slot]; }
  [[nodiscard]] Label vertex_weight(Label v) const { return vertex_weights.empty() ? 1 : vertex_weights[v]; }
};

/// Cells become nodes, internal faces become edges.
CellGraph mesh_to_graph(const UnstructuredMesh& mesh);

/// Builds a CSR graph from an undirected edge list; duplicates and self loops
/// are dropped.
CellGraph graph_from_edges(Label n_nodes, std::span<const std::pair<Label, Label>> edges);

/// Subgraph induced by `nodes` (given in the order that defines local ids).
/// Vertex and edge weights are carried over.
CellGraph induced_subgraph(const CellGraph& graph, std::span<const Label> nodes);

/// Number of connected components and a per-node component id; components
/// are numbered in order of their smallest node.
std::vector<Label> connected_components(const CellGraph& graph, Label* n_components = nullptr);

}  // namespace mcflow
