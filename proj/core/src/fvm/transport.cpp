#include "mcflow/fvm/transport.hpp"

#include <cmath>
#include <string>

#include "mcflow/common/error.hpp"

namespace mcflow {

TransportSolver::TransportSolver(const UnstructuredMesh& mesh, std::span<const CellRange> regions, ThreadPool* pool)
    : mesh_(mesh),
      pool_(pool),
      geometry_(compute_geometry(mesh)),
      schedule_(build_face_schedule(mesh, regions)),
      addressing_(LduAddressing::from_mesh(mesh)),
      system_(build_block_map(*addressing_, regions)) {}

StepRecord TransportSolver::step(ScalarField& field, const TransportSettings& s) {
  field.check(mesh_);
  if (!(s.dt > 0.0)) throw ConfigError("time step must be positive");
  if (s.diffusivity < 0.0) throw ConfigError("diffusivity must be non-negative");
  const auto n = static_cast<std::size_t>(mesh_.n_cells());
  StepRecord rec;
  rec.step = ++steps_done_;
  Stopwatch loop;

  Stopwatch watch;
  AssemblyOptions ao;
  ao.pool = pool_;
  ao.addressing = addressing_;
  const bool convective = s.velocity.x != 0.0 || s.velocity.y != 0.0 || s.velocity.z != 0.0;
  gamma_.assign(static_cast<std::size_t>(mesh_.n_faces()), s.diffusivity);
  FvSystem sys = assemble_laplacian(mesh_, geometry_, gamma_, field, schedule_, ao);
  if (convective) {
    const auto flux = uniform_flux(geometry_, s.velocity);
    const FvSystem div = assemble_divergence(mesh_, geometry_, flux, s.scheme, field, schedule_, ao);
    for (std::size_t i = 0; i < n; ++i) {
      sys.matrix.diag()[i] += div.matrix.diag()[i];
      sys.source[i] += div.source[i];
    }
    for (std::size_t f = 0; f < sys.matrix.lower().size(); ++f) {
      sys.matrix.lower()[f] += div.matrix.lower()[f];
      sys.matrix.upper()[f] += div.matrix.upper()[f];
    }
  }
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double vdt = geometry_.cell_volumes[i] / s.dt;
    sys.matrix.diag()[i] += vdt;
    rhs[i] = sys.source[i] + vdt * field.values[i];
  }
  refresh_values(sys.matrix, system_.map, system_.matrix, pool_);
  rec.phases.construction_s = watch.seconds();

  if (s.source_model != nullptr) {
    watch.restart();
    const MlpModel& m = *s.source_model;
    const std::size_t w = m.input_width();
    if (w != 1 && w != 4) throw DimensionError("source model input width must be 1 or 4");
    std::vector<float> in(n * w);
    for (std::size_t c = 0; c < n; ++c) {
      in[c * w] = static_cast<float>(field.values[c]);
      if (w == 4) {
        const Vec3& x = geometry_.cell_centroids[c];
        in[c * w + 1] = static_cast<float>(x.x);
        in[c * w + 2] = static_cast<float>(x.y);
        in[c * w + 3] = static_cast<float>(x.z);
      }
    }
    InferOptions io;
    io.pool = pool_;
    const auto out = infer(m, in, n, io);
    const std::size_t ow = m.output_width();
    for (std::size_t c = 0; c < n; ++c) rhs[c] += geometry_.cell_volumes[c] * static_cast<double>(out[c * ow]);
    rec.phases.flops += m.flops_per_sample() * n;
    rec.phases.dnn_s = watch.seconds();
  }

  watch.restart();
  std::vector<double> x(field.values);
  FlopCounter flops;
  KernelContext kc{pool_, &flops};
  last_solve_ = convective ? gs_solve(system_.matrix, rhs, x, s.solver, kc) : pcg_solve(system_.matrix, rhs, x, s.solver, kc);
  rec.phases.flops += flops.count();
  rec.phases.solving_s = watch.seconds();

  watch.restart();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) throw DivergenceError("non-finite value in cell " + std::to_string(i));
  }
  field.values = std::move(x);
  rec.phases.other_s = watch.seconds();
  rec.loop_time_s = loop.seconds();
  return rec;
}

std::vector<StepRecord> TransportSolver::advance(ScalarField& field, const TransportSettings& settings, int steps) {
  std::vector<StepRecord> out;
  out.reserve(static_cast<std::size_t>(std::max(steps, 0)));
  for (int i = 0; i < steps; ++i) out.push_back(step(field, settings));
  return out;
}

ScalarField advance_scalar_transport(const UnstructuredMesh& mesh, ScalarField state,
                                     const TransportSettings& settings, int steps,
                                     std::vector<StepRecord>* records) {
  const CellRange all{0, mesh.n_cells()};
  TransportSolver solver(mesh, std::span<const CellRange>(&all, 1));
  auto r = solver.advance(state, settings, steps);
  if (records != nullptr) *records = std::move(r);
  return state;
}

double field_integral(const ScalarField& field, const MeshGeometry& geometry) {
  double total = 0.0;
  for (std::size_t i = 0; i < field.values.size(); ++i) total += field.values[i] * geometry.cell_volumes[i];
  return total;
}

}  // namespace mcflow
