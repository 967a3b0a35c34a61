#include "mcflow/mesh/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "mcflow/common/error.hpp"

namespace mcflow {

CellGraph graph_from_edges(Label n_nodes, std::span<const std::pair<Label, Label>> edges) {
  std::vector<std::pair<Label, Label>> directed;
  directed.reserve(edges.size() * 2);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_nodes || b >= n_nodes) throw DimensionError("edge endpoint out of range");
    if (a == b) continue;
    directed.emplace_back(a, b);
    directed.emplace_back(b, a);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  CellGraph g;
  g.offsets.assign(static_cast<std::size_t>(n_nodes) + 1, 0);
  g.adjacency.reserve(directed.size());
  for (auto [a, b] : directed) {
    ++g.offsets[a + 1];
    g.adjacency.push_back(b);
  }
  std::partial_sum(g.offsets.begin(), g.offsets.end(), g.offsets.begin());
  return g;
}

CellGraph mesh_to_graph(const UnstructuredMesh& mesh) {
  std::vector<std::pair<Label, Label>> edges;
  edges.reserve(static_cast<std::size_t>(mesh.n_internal_faces()));
  for (Label f = 0; f < mesh.n_internal_faces(); ++f) edges.emplace_back(mesh.owner()[f], mesh.neighbour()[f]);
  return graph_from_edges(mesh.n_cells(), edges);
}

CellGraph induced_subgraph(const CellGraph& graph, std::span<const Label> nodes) {
  std::vector<Label> local(static_cast<std::size_t>(graph.n_nodes()), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<Label>(i);

  CellGraph sub;
  sub.offsets.assign(nodes.size() + 1, 0);
  const bool ew = !graph.edge_weights.empty();
  const bool vw = !graph.vertex_weights.empty();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Label v = nodes[i];
    // Neighbour ids are remapped, so re-sort each list.
    std::vector<std::pair<Label, Label>> row;
    for (Label k = graph.offsets[v]; k < graph.offsets[v + 1]; ++k) {
      const Label u = local[graph.adjacency[k]];
      if (u >= 0) row.emplace_back(u, graph.edge_weight(static_cast<std::size_t>(k)));
    }
    std::sort(row.begin(), row.end());
    for (auto [u, w] : row) {
      sub.adjacency.push_back(u);
      if (ew) sub.edge_weights.push_back(w);
    }
    sub.offsets[i + 1] = static_cast<Label>(sub.adjacency.size());
    if (vw) sub.vertex_weights.push_back(graph.vertex_weights[v]);
  }
  return sub;
}

std::vector<Label> connected_components(const CellGraph& graph, Label* n_components) {
  const Label n = graph.n_nodes();
  std::vector<Label> comp(static_cast<std::size_t>(n), -1);
  Label next = 0;
  std::queue<Label> q;
  for (Label s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    q.push(s);
    while (!q.empty()) {
      const Label v = q.front();
      q.pop();
      for (Label u : graph.neighbours(v)) {
        if (comp[u] < 0) {
          comp[u] = next;
          q.push(u);
        }
      }
    }
    ++next;
  }
  if (n_components) *n_components = next;
  return comp;
}

}  // namespace mcflow
