#include "mcflow/fvm/operators.hpp"

#include <string>

#include "mcflow/common/error.hpp"

namespace mcflow {
namespace {

void check_sizes(const UnstructuredMesh& mesh, const MeshGeometry& geometry, std::span<const double> per_face,
                 const ScalarField& field, const FaceSchedule& schedule) {
  if (geometry.cell_volumes.size() != static_cast<std::size_t>(mesh.n_cells()) ||
      geometry.face_areas.size() != static_cast<std::size_t>(mesh.n_faces())) {
    throw DimensionError("geometry does not match mesh");
  }
  if (per_face.size() != static_cast<std::size_t>(mesh.n_faces())) {
    throw DimensionError("face array has " + std::to_string(per_face.size()) + " entries for " +
                         std::to_string(mesh.n_faces()) + " faces");
  }
  field.check(mesh);
  Label covered = 0;
  for (const auto& r : schedule.ranges) covered += r.size();
  if (covered != mesh.n_cells()) throw DimensionError("schedule does not match mesh");
}

FvSystem make_system(const UnstructuredMesh& mesh, const AssemblyOptions& options) {
  auto addressing = options.addressing ? options.addressing : LduAddressing::from_mesh(mesh);
  if (addressing->n_cells != mesh.n_cells() || addressing->n_faces() != mesh.n_internal_faces()) {
    throw DimensionError("addressing does not match mesh");
  }
  FvSystem s{LduMatrix(std::move(addressing)), std::vector<double>(static_cast<std::size_t>(mesh.n_cells()), 0.0)};
  return s;
}

double owner_weight(const MeshGeometry& g, Label o, Label n, Label f) {
  const Vec3& s = g.face_areas[f];
  const double full = dot(g.cell_centroids[n] - g.cell_centroids[o], s);
  if (full == 0.0) return 0.5;
  return dot(g.cell_centroids[n] - g.face_centroids[f], s) / full;
}

}  // namespace

std::vector<double> interpolation_weights(const UnstructuredMesh& mesh, const MeshGeometry& geometry) {
  std::vector<double> w(static_cast<std::size_t>(mesh.n_internal_faces()));
  for (Label f = 0; f < mesh.n_internal_faces(); ++f) w[f] = owner_weight(geometry, mesh.owner()[f], mesh.neighbour()[f], f);
  return w;
}

std::vector<double> uniform_flux(const MeshGeometry& geometry, const Vec3& velocity) {
  std::vector<double> phi(geometry.face_areas.size());
  for (std::size_t f = 0; f < phi.size(); ++f) phi[f] = dot(velocity, geometry.face_areas[f]);
  return phi;
}

FvSystem assemble_laplacian(const UnstructuredMesh& mesh, const MeshGeometry& geometry, std::span<const double> gamma,
                            const ScalarField& field, const FaceSchedule& schedule, const AssemblyOptions& options) {
  check_sizes(mesh, geometry, gamma, field, schedule);
  FvSystem sys = make_system(mesh, options);
  auto& diag = sys.matrix.diag();
  auto& lower = sys.matrix.lower();
  auto& upper = sys.matrix.upper();
  const auto own = mesh.owner();
  const auto nb = mesh.neighbour();
  const Label nf = mesh.n_internal_faces();

  execute_schedule(mesh, schedule, options.pool, options.probe, [&](Label f, FaceSide side, Label) {
    const Label o = own[f];
    if (f < nf) {
      if (side != FaceSide::neighbour) {
        const double d = norm(geometry.cell_centroids[nb[f]] - geometry.cell_centroids[o]);
        if (d == 0.0) throw MeshError("coincident cell centroids across face " + std::to_string(f));
        const double c = gamma[f] * norm(geometry.face_areas[f]) / d;
        upper[f] = -c;
        lower[f] = -c;
        diag[o] += c;
      }
      if (side != FaceSide::owner) diag[nb[f]] -= upper[f];
      return;
    }
    const auto& bc = field.boundary[static_cast<std::size_t>(mesh.patch_of_face(f))];
    if (!bc.is_fixed()) return;
    const double d = norm(geometry.face_centroids[f] - geometry.cell_centroids[o]);
    if (d == 0.0) throw MeshError("boundary face " + std::to_string(f) + " touches its cell centroid");
    const double c = gamma[f] * norm(geometry.face_areas[f]) / d;
    diag[o] += c;
    sys.source[o] += c * field.boundary_value(mesh, f);
  });
  return sys;
}

FvSystem assemble_divergence(const UnstructuredMesh& mesh, const MeshGeometry& geometry, std::span<const double> flux,
                             ConvectionScheme scheme, const ScalarField& field, const FaceSchedule& schedule,
                             const AssemblyOptions& options) {
  check_sizes(mesh, geometry, flux, field, schedule);
  FvSystem sys = make_system(mesh, options);
  auto& diag = sys.matrix.diag();
  auto& lower = sys.matrix.lower();
  auto& upper = sys.matrix.upper();
  const auto own = mesh.owner();
  const auto nb = mesh.neighbour();
  const Label nf = mesh.n_internal_faces();

  execute_schedule(mesh, schedule, options.pool, options.probe, [&](Label f, FaceSide side, Label) {
    const Label o = own[f];
    const double phi = flux[f];
    if (f < nf) {
      if (side != FaceSide::neighbour) {
        double w = 0.5;
        if (scheme == ConvectionScheme::upwind) w = phi >= 0.0 ? 1.0 : 0.0;
        upper[f] = phi * (1.0 - w);
        lower[f] = -phi * w;
        diag[o] -= lower[f];
      }
      if (side != FaceSide::owner) diag[nb[f]] -= upper[f];
      return;
    }
    const auto& bc = field.boundary[static_cast<std::size_t>(mesh.patch_of_face(f))];
    if (phi >= 0.0 || !bc.is_fixed()) {
      diag[o] += phi;
    } else {
      sys.source[o] -= phi * field.boundary_value(mesh, f);
    }
  });
  return sys;
}

std::vector<Vec3> compute_gradient(const UnstructuredMesh& mesh, const MeshGeometry& geometry,
                                   const ScalarField& field, const FaceSchedule& schedule,
                                   const AssemblyOptions& options) {
  field.check(mesh);
  std::vector<Vec3> grad(static_cast<std::size_t>(mesh.n_cells()));
  const auto own = mesh.owner();
  const auto nb = mesh.neighbour();
  const Label nf = mesh.n_internal_faces();
  const auto& psi = field.values;

  execute_schedule(mesh, schedule, options.pool, options.probe, [&](Label f, FaceSide side, Label) {
    const Label o = own[f];
    if (f < nf) {
      const Label n = nb[f];
      const double w = owner_weight(geometry, o, n, f);
      const Vec3 contrib = geometry.face_areas[f] * (w * psi[o] + (1.0 - w) * psi[n]);
      if (side != FaceSide::neighbour) grad[o] += contrib;
      if (side != FaceSide::owner) grad[n] -= contrib;
      return;
    }
    grad[o] += geometry.face_areas[f] * field.boundary_value(mesh, f);
  });
  execute_regions(schedule, options.pool, [&](Label region) {
    const CellRange r = schedule.ranges[region];
    for (Label c = r.begin; c < r.end; ++c) grad[c] *= 1.0 / geometry.cell_volumes[c];
  });
  return grad;
}

}  // namespace mcflow
