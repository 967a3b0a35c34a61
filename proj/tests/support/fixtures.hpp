#pragma once

// Shared builders for finite-volume test matrices.

#include <random>
#include <vector>

#include "mcflow/fvm/operators.hpp"
#include "mcflow/mesh/geometry.hpp"
#include "mcflow/mesh/mesh.hpp"
#include "mcflow/partition/two_level.hpp"
#include "mcflow/sparse/block_csr.hpp"

namespace mcflow::test {

struct Problem {
  UnstructuredMesh mesh;  // renumbered so regions are contiguous
  TwoLevelPartition partition;
  MeshGeometry geometry;
  FaceSchedule schedule;
  FvSystem system;
};

/// FV Laplacian on an n^3 unit box split into `threads` regions. With
/// `dirichlet` every patch is fixed at zero, which makes the matrix SPD.
inline Problem laplacian_problem(int n, Label threads, bool dirichlet = true, std::uint64_t seed = 1) {
  const auto base = build_box_mesh(n, n, n);
  DecomposeOptions opt;
  opt.seed = seed;
  auto part = two_level_decompose(base, 1, threads, opt);
  auto mesh = apply_partition(base, part);
  auto geom = compute_geometry(mesh);
  auto sched = build_face_schedule(mesh, part.ranges);
  const auto bc = dirichlet ? BoundaryCondition::fixed(0.0) : BoundaryCondition::zero_gradient();
  const auto field = ScalarField::uniform(mesh, 0.0, bc);
  const std::vector<double> gamma(static_cast<std::size_t>(mesh.n_faces()), 1.0);
  auto sys = assemble_laplacian(mesh, geom, gamma, field, sched);
  return Problem{std::move(mesh), std::move(part), std::move(geom), std::move(sched), std::move(sys)};
}

inline LduMatrix random_ldu(std::shared_ptr<const LduAddressing> addressing, std::uint64_t seed) {
  LduMatrix m(std::move(addressing));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : m.diag()) v = 10.0 + u(rng);
  for (auto& v : m.lower()) v = u(rng);
  for (auto& v : m.upper()) v = u(rng);
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace mcflow::test
