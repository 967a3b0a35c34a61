#pragma once

#include <span>
#include <vector>

#include "mcflow/mesh/mesh.hpp"

namespace mcflow {

struct BoundaryCondition {
  enum class Kind { fixed_value, zero_gradient };
  Kind kind = Kind::zero_gradient;
  double value = 0.0;
  /// Optional per-face values (patch order); overrides `value` when present.
  std::vector<double> face_values;

  static BoundaryCondition fixed(double v) { return {Kind::fixed_value, v, {}}; }
  static BoundaryCondition fixed_faces(std::vector<double> values) { return {Kind::fixed_value, 0.0, std::move(values)}; }
  static BoundaryCondition zero_gradient() { return {}; }

  [[nodiscard]] bool is_fixed() const noexcept { return kind == Kind::fixed_value; }
  [[nodiscard]] double value_at(Label local_face) const {
    return face_values.empty() ? value : face_values[static_cast<std::size_t>(local_face)];
  }
};

/// Cell values plus one boundary condition per mesh patch.
struct ScalarField {
  std::vector<double> values;
  std::vector<BoundaryCondition> boundary;

  static ScalarField uniform(const UnstructuredMesh& mesh, double value,
                             const BoundaryCondition& bc = BoundaryCondition::zero_gradient());

  /// Face value on boundary face `face` given the owner cell value.
  [[nodiscard]] double boundary_value(const UnstructuredMesh& mesh, Label face) const;
  /// Throws DimensionError when sizes do not match the mesh.
  void check(const UnstructuredMesh& mesh) const;
};

}  // namespace mcflow
