#include "mcflow/fvm/field.hpp"

#include <string>

#include "mcflow/common/error.hpp"

namespace mcflow {

ScalarField ScalarField::uniform(const UnstructuredMesh& mesh, double value, const BoundaryCondition& bc) {
  ScalarField f;
  f.values.assign(static_cast<std::size_t>(mesh.n_cells()), value);
  f.boundary.assign(mesh.patches().size(), bc);
  return f;
}

double ScalarField::boundary_value(const UnstructuredMesh& mesh, Label face) const {
  const Label p = mesh.patch_of_face(face);
  const auto& bc = boundary[static_cast<std::size_t>(p)];
  if (bc.is_fixed()) return bc.value_at(face - mesh.patches()[static_cast<std::size_t>(p)].start);
  return values[static_cast<std::size_t>(mesh.owner()[face])];
}

void ScalarField::check(const UnstructuredMesh& mesh) const {
  if (values.size() != static_cast<std::size_t>(mesh.n_cells())) {
    throw DimensionError("field has " + std::to_string(values.size()) + " values for " +
                         std::to_string(mesh.n_cells()) + " cells");
  }
  if (boundary.size() != mesh.patches().size()) throw DimensionError("field needs one boundary condition per patch");
  for (std::size_t p = 0; p < boundary.size(); ++p) {
    const auto& bc = boundary[p];
    if (!bc.face_values.empty() && bc.face_values.size() != static_cast<std::size_t>(mesh.patches()[p].size)) {
      throw DimensionError("patch " + mesh.patches()[p].name + " has the wrong number of face values");
    }
  }
}

}  // namespace mcflow
