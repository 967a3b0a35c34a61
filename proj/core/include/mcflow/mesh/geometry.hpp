#pragma once

#include <vector>

#include "mcflow/mesh/mesh.hpp"

namespace mcflow {

struct MeshGeometry {
  std::vector<double> cell_volumes;
  std::vector<Vec3> cell_centroids;
  /// Area vectors, oriented out of the owner cell.
  std::vector<Vec3> face_areas;
  std::vector<Vec3> face_centroids;
};

/// Finite-volume geometry. Faces are split into triangles around their point
/// average and cells into pyramids around the average of their face centres.
/// Throws DegenerateCellError for a cell with non-positive volume.
MeshGeometry compute_geometry(const UnstructuredMesh& mesh);

/// max over cells of |sum of outward face area vectors| / max face area.
double closure_residual(const UnstructuredMesh& mesh, const MeshGeometry& geometry);

}  // namespace mcflow
