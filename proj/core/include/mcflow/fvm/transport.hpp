#pragma once

#include <span>
#include <vector>

#include "mcflow/fvm/operators.hpp"
#include "mcflow/metrics/report.hpp"
#include "mcflow/nn/mlp.hpp"
#include "mcflow/sparse/block_csr.hpp"
#include "mcflow/sparse/solvers.hpp"

namespace mcflow {

/// Implicit Euler advection-diffusion with an optional network source:
///   V/dt (psi - psi_old) + div(u psi) - div(gamma grad psi) = V s(psi).
struct TransportSettings {
  double dt = 1e-2;
  Vec3 velocity{};
  double diffusivity = 1e-2;
  ConvectionScheme scheme = ConvectionScheme::upwind;
  /// Input width 1 (psi) or 4 (psi, x, y, z); output 0 is the source density.
  const MlpModel* source_model = nullptr;
  SolverOptions solver{1e-12, 2000, Preconditioner::diagonal()};
};

/// Holds everything reused between steps: geometry, face schedule, the block
/// structure and its slot map. The mesh must already be numbered so that
/// every region is a contiguous index range.
class TransportSolver {
 public:
  TransportSolver(const UnstructuredMesh& mesh, std::span<const CellRange> regions, ThreadPool* pool = nullptr);

  /// Advances one step in place and returns its timing record.
  StepRecord step(ScalarField& field, const TransportSettings& settings);
  std::vector<StepRecord> advance(ScalarField& field, const TransportSettings& settings, int steps);

  [[nodiscard]] const MeshGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] const FaceSchedule& schedule() const noexcept { return schedule_; }
  [[nodiscard]] const SolveResult& last_solve() const noexcept { return last_solve_; }

 private:
  const UnstructuredMesh& mesh_;
  ThreadPool* pool_;
  MeshGeometry geometry_;
  FaceSchedule schedule_;
  std::shared_ptr<const LduAddressing> addressing_;
  BlockSystem system_;
  std::vector<double> gamma_;
  SolveResult last_solve_;
  int steps_done_ = 0;
};

/// Single-region convenience wrapper.
ScalarField advance_scalar_transport(const UnstructuredMesh& mesh, ScalarField state,
                                     const TransportSettings& settings, int steps,
                                     std::vector<StepRecord>* records = nullptr);

/// sum over cells of psi * V.
double field_integral(const ScalarField& field, const MeshGeometry& geometry);

}  // namespace mcflow
