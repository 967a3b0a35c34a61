#include "mcflow/mesh/geometry.hpp"

#include <algorithm>

#include "mcflow/common/error.hpp"

namespace mcflow {

MeshGeometry compute_geometry(const UnstructuredMesh& mesh) {
  const auto points = mesh.points();
  const auto faces = mesh.faces();
  const auto owner = mesh.owner();
  const auto neighbour = mesh.neighbour();
  const auto nf = static_cast<std::size_t>(mesh.n_faces());
  const auto nc = static_cast<std::size_t>(mesh.n_cells());

  MeshGeometry g;
  g.face_areas.resize(nf);
  g.face_centroids.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& q = faces[f];
    Vec3 mid{};
    for (Label p : q) mid += points[p];
    mid *= 0.25;

    Vec3 area{};
    Vec3 weighted{};
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const Vec3& a = points[q[i]];
      const Vec3& b = points[q[(i + 1) % 4]];
      const Vec3 s = 0.5 * cross(a - mid, b - mid);
      const double mag = norm(s);
      area += s;
      weighted += mag * ((a + b + mid) * (1.0 / 3.0));
      total += mag;
    }
    g.face_areas[f] = area;
    g.face_centroids[f] = total > 0.0 ? weighted * (1.0 / total) : mid;
  }

  // Cell centre estimate: average of face centroids.
  std::vector<Vec3> estimate(nc);
  std::vector<int> count(nc, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    estimate[owner[f]] += g.face_centroids[f];
    ++count[owner[f]];
    if (f < neighbour.size()) {
      estimate[neighbour[f]] += g.face_centroids[f];
      ++count[neighbour[f]];
    }
  }
  for (std::size_t c = 0; c < nc; ++c) estimate[c] *= 1.0 / count[c];

  g.cell_volumes.assign(nc, 0.0);
  g.cell_centroids.assign(nc, Vec3{});
  auto pyramid = [&](std::size_t cell, std::size_t f, double sign) {
    // Pyramid with apex at the cell estimate and base = face, outward area sign*S.
    const double v = sign * dot(g.face_areas[f], g.face_centroids[f] - estimate[cell]) / 3.0;
    g.cell_volumes[cell] += v;
    g.cell_centroids[cell] += v * (0.75 * g.face_centroids[f] + 0.25 * estimate[cell]);
  };
  for (std::size_t f = 0; f < nf; ++f) {
    pyramid(static_cast<std::size_t>(owner[f]), f, 1.0);
    if (f < neighbour.size()) pyramid(static_cast<std::size_t>(neighbour[f]), f, -1.0);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const double v = g.cell_volumes[c];
    if (!(v > 0.0)) throw DegenerateCellError(static_cast<std::int64_t>(c), v);
    g.cell_centroids[c] *= 1.0 / v;
  }
  return g;
}

double closure_residual(const UnstructuredMesh& mesh, const MeshGeometry& geometry) {
  const auto owner = mesh.owner();
  const auto neighbour = mesh.neighbour();
  std::vector<Vec3> sum(static_cast<std::size_t>(mesh.n_cells()));
  double max_area = 0.0;
  for (std::size_t f = 0; f < geometry.face_areas.size(); ++f) {
    sum[owner[f]] += geometry.face_areas[f];
    if (f < neighbour.size()) sum[neighbour[f]] -= geometry.face_areas[f];
    max_area = std::max(max_area, norm(geometry.face_areas[f]));
  }
  double worst = 0.0;
  for (const auto& s : sum) worst = std::max(worst, norm(s));
  return max_area > 0.0 ? worst / max_area : worst;
}

}  // namespace mcflow
