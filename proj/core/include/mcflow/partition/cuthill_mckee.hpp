#pragma once

#include <span>
#include <vector>

#include "mcflow/mesh/graph.hpp"

namespace mcflow {

/// Cuthill-McKee ordering. Returns new_index[old]. Each connected component
/// starts at a pseudo-peripheral node and is numbered breadth first, visiting
/// unnumbered neighbours by ascending degree and then ascending index.
/// Components follow one another in order of their smallest node.
std::vector<Label> cuthill_mckee(const CellGraph& graph);

/// max |new_index[u] - new_index[v]| over all edges (0 for edgeless graphs).
Label bandwidth(const CellGraph& graph, std::span<const Label> new_index);

/// Inverse of a permutation given as new_index[old].
std::vector<Label> invert_permutation(std::span<const Label> new_index);

}  // namespace mcflow
