#pragma once

#include <span>
#include <vector>

#include "mcflow/fvm/field.hpp"
#include "mcflow/fvm/schedule.hpp"
#include "mcflow/mesh/geometry.hpp"
#include "mcflow/sparse/ldu_matrix.hpp"

namespace mcflow {

/// Matrix plus right-hand side contributions from boundary conditions.
struct FvSystem {
  LduMatrix matrix;
  std::vector<double> source;
};

enum class ConvectionScheme { upwind, linear };

struct AssemblyOptions {
  ThreadPool* pool = nullptr;
  WriteProbe* probe = nullptr;
  /// Reuse this pattern instead of building one from the mesh.
  std::shared_ptr<const LduAddressing> addressing;
};

/// Two-point flux discretisation of -div(gamma grad psi): per internal face
/// c = gamma |S| / |d| on the diagonals and -c off the diagonal. Fixed-value
/// boundary faces add c_b to the diagonal and c_b * value to the source.
/// `gamma` has one value per face (internal and boundary).
FvSystem assemble_laplacian(const UnstructuredMesh& mesh, const MeshGeometry& geometry, std::span<const double> gamma,
                            const ScalarField& field, const FaceSchedule& schedule,
                            const AssemblyOptions& options = {});

/// Implicit div(phi psi) with face fluxes `flux` (one per face, positive out
/// of the owner). Outflow and zero-gradient boundary faces go to the diagonal,
/// fixed-value inflow faces to the source.
FvSystem assemble_divergence(const UnstructuredMesh& mesh, const MeshGeometry& geometry, std::span<const double> flux,
                             ConvectionScheme scheme, const ScalarField& field, const FaceSchedule& schedule,
                             const AssemblyOptions& options = {});

/// Green-Gauss cell gradient with linearly interpolated face values.
std::vector<Vec3> compute_gradient(const UnstructuredMesh& mesh, const MeshGeometry& geometry,
                                   const ScalarField& field, const FaceSchedule& schedule,
                                   const AssemblyOptions& options = {});

/// Face fluxes u . S for a uniform velocity.
std::vector<double> uniform_flux(const MeshGeometry& geometry, const Vec3& velocity);

/// Owner interpolation weight of every internal face.
std::vector<double> interpolation_weights(const UnstructuredMesh& mesh, const MeshGeometry& geometry);

}  // namespace mcflow
