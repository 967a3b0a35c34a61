#pragma once

#include <cstdint>

#include "mcflow/mesh/mesh.hpp"

namespace mcflow {

/// n_cells * 8^levels with overflow detection (throws MeshError).
std::uint64_t refined_cell_count(std::uint64_t n_cells, int levels);

/// Splits every hexahedron into 8 children `levels` times, using arithmetic
/// means of the defining points for edge, face and cell midpoints. Children
/// of cell c are numbered 8c..8c+7; boundary patches are inherited.
UnstructuredMesh refine_uniform(const UnstructuredMesh& mesh, int levels);

}  // namespace mcflow
