#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mcflow/common/types.hpp"

namespace mcflow {

/// Quadrilateral face as four point indices. Ordering follows the right-hand
/// rule with the normal pointing out of the owner cell.
using QuadFace = std::array<Label, 4>;

/// Eight point indices of a hexahedron in VTK order: bottom quad (0,1,2,3)
/// counter-clockwise seen from above, top quad (4,5,6,7) above it.
using HexVertices = std::array<Label, 8>;

/// Named contiguous range of boundary faces. `start` is an absolute face index.
struct BoundaryPatch {
  std::string name;
  Label start = 0;
  Label size = 0;

  friend bool operator==(const BoundaryPatch&, const BoundaryPatch&) = default;
};

/// Face-addressed unstructured mesh.
///
/// Faces [0, n_internal_faces()) are internal and carry an owner and a
/// neighbour with owner < neighbour. The remaining faces are boundary faces,
/// grouped into patches that cover them contiguously and in order. The
/// constructor validates all of this plus cell connectivity, so a constructed
/// mesh is always well formed. Objects are immutable.
class UnstructuredMesh {
 public:
  UnstructuredMesh(Label n_cells, std::vector<Vec3> points, std::vector<QuadFace> faces, std::vector<Label> owner,
                   std::vector<Label> neighbour, std::vector<BoundaryPatch> patches);

  [[nodiscard]] Label n_cells() const noexcept { return n_cells_; }
  [[nodiscard]] Label n_points() const noexcept { return static_cast<Label>(points_.size()); }
  [[nodiscard]] Label n_faces() const noexcept { return static_cast<Label>(faces_.size()); }
  [[nodiscard]] Label n_internal_faces() const noexcept { return static_cast<Label>(neighbour_.size()); }
  [[nodiscard]] Label n_boundary_faces() const noexcept { return n_faces() - n_internal_faces(); }

  [[nodiscard]] std::span<const Vec3> points() const noexcept { return points_; }
  [[nodiscard]] std::span<const QuadFace> faces() const noexcept { return faces_; }
  [[nodiscard]] std::span<const Label> owner() const noexcept { return owner_; }
  [[nodiscard]] std::span<const Label> neighbour() const noexcept { return neighbour_; }
  [[nodiscard]] std::span<const BoundaryPatch> patches() const noexcept { return patches_; }

  /// Patch index of boundary face `face`.
  [[nodiscard]] Label patch_of_face(Label face) const;
  /// Index of the patch called `name`, or -1.
  [[nodiscard]] Label find_patch(const std::string& name) const;

  friend bool operator==(const UnstructuredMesh&, const UnstructuredMesh&) = default;

 private:
  void validate() const;

  Label n_cells_;
  std::vector<Vec3> points_;
  std::vector<QuadFace> faces_;
  std::vector<Label> owner_;
  std::vector<Label> neighbour_;
  std::vector<BoundaryPatch> patches_;
};

/// Returns the patch index for boundary side `local_face` (0..5 as x-, x+,
/// y-, y+, z-, z+ in hex-local coordinates) of `cell`, or -1 when that side
/// must not lie on the boundary.
using BoundaryClassifier = std::function<Label(Label cell, int local_face)>;

/// Builds a face-addressed mesh from hexahedral cells. Shared faces are
/// detected by their point sets; internal faces are ordered by (owner,
/// neighbour) and boundary faces by (patch, owner, local side).
UnstructuredMesh mesh_from_hexes(std::vector<Vec3> points, std::span<const HexVertices> hexes,
                                 std::vector<std::string> patch_names, const BoundaryClassifier& classify);

/// Outward-oriented quad of side `local_face` of a VTK-ordered hex.
QuadFace hex_side(const HexVertices& hex, int local_face);

/// Axis-aligned box [0,lx]x[0,ly]x[0,lz] with nx*ny*nz cells numbered
/// lexicographically (x fastest). Patches: xmin, xmax, ymin, ymax, zmin, zmax.
UnstructuredMesh build_box_mesh(Label nx, Label ny, Label nz, const Vec3& lengths = {1.0, 1.0, 1.0});

/// Per-cell hexahedral connectivity recovered from face addressing.
struct HexCell {
  HexVertices vertices{};
  /// Global face index of each hex-local side (x-, x+, y-, y+, z-, z+).
  std::array<Label, 6> sides{};
};

/// Recovers VTK-ordered hexes from the faces of every cell. Throws MeshError
/// naming the first cell that is not a hexahedron.
std::vector<HexCell> cell_hexes(const UnstructuredMesh& mesh);

/// Faces of every cell, in ascending face order (CSR layout).
struct CellFaces {
  std::vector<Label> offsets;
  std::vector<Label> faces;

  [[nodiscard]] std::span<const Label> of(Label cell) const {
    return std::span<const Label>(faces).subspan(static_cast<std::size_t>(offsets[cell]),
                                                 static_cast<std::size_t>(offsets[cell + 1] - offsets[cell]));
  }
};
CellFaces cell_faces(const UnstructuredMesh& mesh);

/// Structural comparison that ignores point numbering: two meshes are equal
/// when they have the same cells, the same faces (by point coordinates, up to
/// cyclic rotation) with the same owner/neighbour/patch, in the same order.
bool canonically_equal(const UnstructuredMesh& a, const UnstructuredMesh& b);

/// Returns a copy of `mesh` with cell c renamed to new_index[c]. Faces are
/// re-sorted so the owner < neighbour ordering holds again; faces whose
/// owner and neighbour swap are flipped.
UnstructuredMesh renumber_cells(const UnstructuredMesh& mesh, std::span<const Label> new_index);

}  // namespace mcflow
