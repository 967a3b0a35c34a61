#include "mcflow/partition/cuthill_mckee.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>

#include "mcflow/common/error.hpp"

namespace mcflow {

namespace {

// BFS level structure from root restricted to unnumbered nodes; returns the
// eccentricity and the lowest-degree node (then lowest index) of the last level.
std::pair<Label, Label> last_level(const CellGraph& g, Label root, std::vector<Label>& dist) {
  std::vector<Label> touched{root};
  std::queue<Label> q;
  q.push(root);
  dist[root] = 0;
  Label depth = 0;
  Label pick = root;
  while (!q.empty()) {
    const Label v = q.front();
    q.pop();
    if (dist[v] > depth) {
      depth = dist[v];
      pick = v;
    } else if (dist[v] == depth && (g.degree(v) < g.degree(pick) || (g.degree(v) == g.degree(pick) && v < pick))) {
      pick = v;
    }
    for (Label u : g.neighbours(v)) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        touched.push_back(u);
        q.push(u);
      }
    }
  }
  for (Label v : touched) dist[v] = -1;
  return {depth, pick};
}

}  // namespace

std::vector<Label> cuthill_mckee(const CellGraph& graph) {
  const Label n = graph.n_nodes();
  std::vector<Label> new_index(static_cast<std::size_t>(n), -1);
  std::vector<Label> dist(static_cast<std::size_t>(n), -1);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  Label next = 0;
  std::vector<Label> component;
  std::vector<Label> candidates;

  for (Label s = 0; s < n; ++s) {
    if (new_index[s] >= 0) continue;

    // Collect the component of s to choose its start node.
    component.clear();
    component.push_back(s);
    seen[s] = 1;
    for (std::size_t i = 0; i < component.size(); ++i) {
      for (Label u : graph.neighbours(component[i])) {
        if (!seen[u]) {
          seen[u] = 1;
          component.push_back(u);
        }
      }
    }
    Label root = *std::min_element(component.begin(), component.end(), [&](Label a, Label b) {
      return graph.degree(a) != graph.degree(b) ? graph.degree(a) < graph.degree(b) : a < b;
    });
    auto [ecc, far] = last_level(graph, root, dist);
    for (int iter = 0; iter < 16; ++iter) {
      auto [ecc2, far2] = last_level(graph, far, dist);
      if (ecc2 <= ecc) break;
      root = far;
      ecc = ecc2;
      far = far2;
    }

    std::queue<Label> q;
    q.push(root);
    new_index[root] = next++;
    while (!q.empty()) {
      const Label v = q.front();
      q.pop();
      candidates.clear();
      for (Label u : graph.neighbours(v)) {
        if (new_index[u] < 0) candidates.push_back(u);
      }
      std::sort(candidates.begin(), candidates.end(), [&](Label a, Label b) {
        return graph.degree(a) != graph.degree(b) ? graph.degree(a) < graph.degree(b) : a < b;
      });
      for (Label u : candidates) {
        new_index[u] = next++;
        q.push(u);
      }
    }
  }
  return new_index;
}

Label bandwidth(const CellGraph& graph, std::span<const Label> new_index) {
  if (new_index.size() != static_cast<std::size_t>(graph.n_nodes())) throw DimensionError("permutation length mismatch");
  Label bw = 0;
  for (Label v = 0; v < graph.n_nodes(); ++v) {
    for (Label u : graph.neighbours(v)) bw = std::max(bw, static_cast<Label>(std::abs(new_index[u] - new_index[v])));
  }
  return bw;
}

std::vector<Label> invert_permutation(std::span<const Label> new_index) {
  std::vector<Label> inv(new_index.size(), -1);
  for (std::size_t i = 0; i < new_index.size(); ++i) {
    const Label t = new_index[i];
    if (t < 0 || static_cast<std::size_t>(t) >= new_index.size() || inv[t] >= 0) {
      throw PartitionError("not a permutation");
    }
    inv[t] = static_cast<Label>(i);
  }
  return inv;
}

}  // namespace mcflow
