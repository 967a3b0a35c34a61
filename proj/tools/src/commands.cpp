#include "mcflow/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>

#include "mcflow/common/error.hpp"
#include "mcflow/common/thread_pool.hpp"
#include "mcflow/fvm/transport.hpp"
#include "mcflow/io/collated.hpp"
#include "mcflow/io/mesh_io.hpp"
#include "mcflow/io/read_strategy.hpp"
#include "mcflow/mesh/refine.hpp"
#include "mcflow/metrics/report.hpp"
#include "mcflow/nn/model_io.hpp"
#include "mcflow/partition/two_level.hpp"
#include "mcflow/sparse/solvers.hpp"

namespace mcflow::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kMaxCells = 50'000'000;

// Sends the report to stdout and, when configured, to the report file.
void emit(const RunConfig& c, std::ostream& out, const std::string& csv) {
  out << csv;
  if (!c.report.empty()) {
    std::ofstream f(c.report);
    if (!f) throw IoError("cannot open report '" + c.report + "'");
    f << csv;
  }
}

std::unique_ptr<ThreadPool> make_pool(int threads) {
  return threads > 1 ? std::make_unique<ThreadPool>(threads) : nullptr;
}

struct Decomposed {
  UnstructuredMesh mesh;
  TwoLevelPartition partition;
};

Decomposed decompose_for(const UnstructuredMesh& mesh, Label ranks, Label threads, std::uint64_t seed) {
  DecomposeOptions o;
  o.seed = seed;
  auto part = two_level_decompose(mesh, ranks, threads, o);
  auto renumbered = apply_partition(mesh, part);
  return {std::move(renumbered), std::move(part)};
}

ScalarField initial_bump(const UnstructuredMesh& mesh, const MeshGeometry& geom) {
  Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const auto& c : geom.cell_centroids) {
    lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
    hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
  }
  const Vec3 mid{(lo.x + hi.x) / 2, (lo.y + hi.y) / 2, (lo.z + hi.z) / 2};
  const double w = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z, 1e-12}) / 4;
  auto f = ScalarField::uniform(mesh, 0.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const auto& c = geom.cell_centroids[i];
    const double r2 = (c.x - mid.x) * (c.x - mid.x) + (c.y - mid.y) * (c.y - mid.y) + (c.z - mid.z) * (c.z - mid.z);
    f.values[i] = std::exp(-r2 / (w * w));
  }
  return f;
}

TransportSettings transport_settings(const RunConfig& c, const MlpModel* model) {
  TransportSettings s;
  s.dt = c.dt;
  s.velocity = {c.velocity[0], c.velocity[1], c.velocity[2]};
  s.diffusivity = c.diffusivity;
  s.scheme = c.scheme == "linear" ? ConvectionScheme::linear : ConvectionScheme::upwind;
  s.source_model = model;
  s.solver.tolerance = c.tolerance;
  s.solver.max_iterations = c.max_iterations;
  s.solver.preconditioner = Preconditioner::parse(c.preconditioner);
  return s;
}

struct SimulationRun {
  std::vector<StepRecord> steps;
  Label cells = 0;
  double integral_before = 0.0;
  double integral_after = 0.0;
};

SimulationRun run_simulation(const RunConfig& c, const UnstructuredMesh& base, int threads) {
  std::unique_ptr<MlpModel> model;
  if (!c.model.empty()) model = std::make_unique<MlpModel>(load_model(c.model));
  const auto d = decompose_for(base, 1, threads, c.seed);
  auto pool = make_pool(threads);
  TransportSolver solver(d.mesh, d.partition.ranges, pool.get());
  auto field = initial_bump(d.mesh, solver.geometry());
  SimulationRun run;
  run.cells = d.mesh.n_cells();
  run.integral_before = field_integral(field, solver.geometry());
  run.steps = solver.advance(field, transport_settings(c, model.get()), c.steps);
  run.integral_after = field_integral(field, solver.geometry());
  return run;
}

std::vector<float> normal_inputs(const MlpModel& m, std::size_t batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  std::vector<float> x(batch * m.input_width());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = i % m.input_width();
    x[i] = m.mean()[j] + m.stddev()[j] * n(rng);
  }
  return x;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

UnstructuredMesh load_mesh(const RunConfig& c) {
  UnstructuredMesh base = c.mesh.empty() ? build_box_mesh(c.cells[0], c.cells[1], c.cells[2]) : read_mesh(c.mesh);
  if (c.refine == 0) return base;
  const auto target = refined_cell_count(static_cast<std::uint64_t>(base.n_cells()), c.refine);
  if (target > kMaxCells) {
    throw ConfigError("refinement to " + std::to_string(target) + " cells exceeds the budget of " +
                      std::to_string(kMaxCells));
  }
  return refine_uniform(base, c.refine);
}

void cmd_generate(const RunConfig& c, std::ostream& out) {
  const fs::path dir = c.output.empty() ? fs::path("mcflow_out") : fs::path(c.output);
  const auto mesh = load_mesh(c);
  write_mesh((dir / "mesh").string(), mesh);

  DecomposeOptions o;
  o.seed = c.seed;
  const auto part = two_level_decompose(mesh, c.ranks, c.threads, o);
  write_partition((dir / "partition.bin").string(), part);

  // Initial field, one payload per rank in the renumbered cell order.
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> psi(static_cast<std::size_t>(mesh.n_cells()));
  for (auto& v : psi) v = u(rng);
  std::vector<Payload> payloads;
  for (Label r = 0; r < part.n_ranks; ++r) {
    std::vector<double> local;
    const Label first = part.range(r, 0).begin;
    const Label last = part.range(r, part.n_threads - 1).end;
    for (Label k = first; k < last; ++k) local.push_back(psi[static_cast<std::size_t>(part.inverse_permutation[k])]);
    payloads.push_back(to_payload<double>(local));
  }
  const auto field_path = (dir / "psi").string();
  write_collated(field_path, "psi", DType::f64, payloads);
  (void)build_index(field_path);

  if (!c.layers.empty()) save_model(MlpModel::random(c.layers, c.seed), (dir / "model.mcnn").string());

  std::ostringstream csv;
  csv << "cells,faces,ranks,threads,mesh_bytes,field_bytes\n"
      << mesh.n_cells() << ',' << mesh.n_faces() << ',' << c.ranks << ',' << c.threads << ','
      << mesh_directory_bytes((dir / "mesh").string()) << ',' << fs::file_size(field_path) << '\n';
  emit(c, out, csv.str());
}

void cmd_partition(const RunConfig& c, std::ostream& out) {
  const auto mesh = load_mesh(c);
  DecomposeOptions o;
  o.seed = c.seed;
  const auto opt = two_level_decompose(mesh, c.ranks, c.threads, o);
  const auto naive = index_block_decompose(mesh, c.ranks, c.threads);
  if (!c.output.empty()) write_partition(c.output, opt);
  std::ostringstream csv;
  csv << "method,ranks,threads,cells,balance,edge_cut,rank_edge_cut,offdiag_fraction,nonzero_blocks\n";
  csv << std::setprecision(9);
  for (const auto& [name, p] : {std::pair<const char*, const TwoLevelPartition*>{"index_block", &naive},
                                std::pair<const char*, const TwoLevelPartition*>{"two_level", &opt}}) {
    const auto s = partition_stats(mesh, *p);
    csv << name << ',' << c.ranks << ',' << c.threads << ',' << mesh.n_cells() << ',' << s.balance() << ','
        << s.edge_cut << ',' << s.rank_edge_cut << ',' << s.offdiag_fraction << ',' << s.nonzero_block_count << '\n';
  }
  emit(c, out, csv.str());
}

void cmd_solve(const RunConfig& c, std::ostream& out) {
  const auto d = decompose_for(load_mesh(c), 1, c.threads, c.seed);
  auto pool = make_pool(c.threads);
  Stopwatch watch;
  const auto geom = compute_geometry(d.mesh);
  const auto sched = build_face_schedule(d.mesh, d.partition.ranges);
  const std::vector<double> gamma(static_cast<std::size_t>(d.mesh.n_faces()), 1.0);
  const auto field = ScalarField::uniform(d.mesh, 0.0, BoundaryCondition::fixed(0.0));
  AssemblyOptions ao;
  ao.pool = pool.get();
  const auto sys = assemble_laplacian(d.mesh, geom, gamma, field, sched, ao);
  auto block = build_block_map(d.mesh, d.partition);
  refresh_values(sys.matrix, block.map, block.matrix, pool.get());
  std::vector<double> b(sys.source);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += geom.cell_volumes[i];
  const double assembly_s = watch.seconds();

  SolverOptions so{c.tolerance, c.max_iterations, Preconditioner::parse(c.preconditioner)};
  std::vector<double> x(b.size(), 0.0);
  FlopCounter flops;
  watch.restart();
  const auto r = c.solver == "gs" ? gs_solve(block.matrix, b, x, so, {pool.get(), &flops})
                                  : pcg_solve(block.matrix, b, x, so, {pool.get(), &flops});
  const double solve_s = watch.seconds();
  std::ostringstream csv;
  csv << "cells,threads,solver,preconditioner,iterations,residual,converged,assembly_s,solve_s,flops,flops_per_s\n";
  csv << std::setprecision(9) << d.mesh.n_cells() << ',' << c.threads << ',' << c.solver << ','
      << to_string(so.preconditioner) << ',' << r.iterations << ',' << r.residual << ',' << (r.converged ? 1 : 0)
      << ',' << assembly_s << ',' << solve_s << ',' << flops.count() << ','
      << (solve_s > 0 ? static_cast<double>(flops.count()) / solve_s : 0.0) << '\n';
  emit(c, out, csv.str());
  if (!r.converged) throw DivergenceError("solver did not converge in " + std::to_string(r.iterations) + " iterations");
}

void cmd_simulate(const RunConfig& c, std::ostream& out) {
  const auto run = run_simulation(c, load_mesh(c), c.threads);
  if (!c.report.empty()) write_phase_csv(c.report, run.steps);
  const auto s = summarize(run.steps, static_cast<double>(run.cells), c.flow_cycle);
  std::ostringstream csv;
  csv << "steps,cells,threads,loop_s,construction_s,solving_s,dnn_s,other_s,flops_per_step,time_to_solution,"
         "flops_per_s,integral_before,integral_after\n";
  csv << std::setprecision(9) << c.steps << ',' << run.cells << ',' << c.threads << ',' << s.loop_time_s << ','
      << s.phases.construction_s << ',' << s.phases.solving_s << ',' << s.phases.dnn_s << ',' << s.phases.other_s
      << ',' << s.flops_total << ',' << time_to_solution(s) << ','
      << (s.loop_time_s > 0 ? flops_rate(s) : 0.0) << ',' << run.integral_before << ',' << run.integral_after << '\n';
  out << csv.str();
}

void cmd_breakdown(const RunConfig& c, std::ostream& out) {
  const auto run = run_simulation(c, load_mesh(c), c.threads);
  std::ostringstream csv;
  csv << "step,construction_s,solving_s,dnn_s,other_s,total_s,flops\n" << std::setprecision(9);
  for (const auto& s : run.steps) {
    csv << s.step << ',' << s.phases.construction_s << ',' << s.phases.solving_s << ',' << s.phases.dnn_s << ','
        << s.phases.other_s << ',' << s.loop_time_s << ',' << s.phases.flops << '\n';
  }
  const auto m = summarize(run.steps, static_cast<double>(run.cells), c.flow_cycle);
  csv << "mean," << m.phases.construction_s << ',' << m.phases.solving_s << ',' << m.phases.dnn_s << ','
      << m.phases.other_s << ',' << m.loop_time_s << ',' << m.flops_total << '\n';
  emit(c, out, csv.str());
}

void cmd_scaling(const RunConfig& c, std::ostream& out) {
  auto threads = c.thread_list;
  std::sort(threads.begin(), threads.end());
  threads.erase(std::unique(threads.begin(), threads.end()), threads.end());
  const bool weak = c.mode == "weak";
  std::ostringstream csv;
  csv << "mode,threads,cells,dof,loop_s,speedup,efficiency\n" << std::setprecision(9);
  double base_time = 0.0;
  const int t0 = threads.front();
  for (int t : threads) {
    RunConfig rc = c;
    if (weak) rc.cells[0] = c.cells[0] * t / t0;
    if (weak && rc.cells[0] * t0 != c.cells[0] * t) throw ConfigError("weak scaling needs cells[0] * t divisible by the smallest thread count");
    const auto run = run_simulation(rc, load_mesh(rc), t);
    const auto s = summarize(run.steps, static_cast<double>(run.cells), c.flow_cycle);
    if (t == t0) base_time = s.loop_time_s;
    const double ratio = s.loop_time_s > 0 ? base_time / s.loop_time_s : 0.0;
    const double eff = weak ? ratio : ratio * t0 / t;
    const double speedup = weak ? ratio * t / t0 : ratio;
    csv << c.mode << ',' << t << ',' << run.cells << ',' << run.cells << ',' << s.loop_time_s << ',' << speedup << ','
        << eff << '\n';
  }
  emit(c, out, csv.str());
}

void cmd_infer_bench(const RunConfig& c, std::ostream& out) {
  MlpModel base = !c.model.empty() ? load_model(c.model)
                                   : MlpModel::random(c.layers.empty() ? std::vector<std::uint32_t>{20, 256, 256, 17} : c.layers, c.seed);
  const Precision prec = parse_precision(c.precision);
  MlpModel model = base.converted(prec);
  model.set_activation(parse_activation(c.activation));
  MlpModel reference = base.converted(Precision::fp32);
  reference.set_activation(Activation::gelu_exact);

  const auto batch = static_cast<std::size_t>(c.batch);
  const auto x = normal_inputs(model, batch, c.seed + 1);
  auto pool = make_pool(c.threads);
  InferOptions io;
  io.pool = pool.get();
  std::vector<float> y = infer(model, x, batch, io);
  std::vector<double> times;
  for (int r = 0; r < c.repeat; ++r) {
    Stopwatch w;
    y = infer(model, x, batch, io);
    times.push_back(w.seconds());
  }
  const double t = median(times);

  const auto ref = infer(reference, x, batch, io);
  const std::size_t ow = model.output_width();
  double worst = 0.0, sum = 0.0;
  for (std::size_t s = 0; s < batch; ++s) {
    double num = 0.0, den = 0.0;
    for (std::size_t o = 0; o < ow; ++o) {
      const double d = static_cast<double>(y[s * ow + o]) - ref[s * ow + o];
      num += d * d;
      den += static_cast<double>(ref[s * ow + o]) * ref[s * ow + o];
    }
    const double e = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
    worst = std::max(worst, e);
    sum += e;
  }
  const double flops = static_cast<double>(model.flops_per_sample()) * static_cast<double>(batch);
  std::ostringstream csv;
  csv << "precision,activation,batch,repeat,threads,median_s,samples_per_s,flops_per_s,max_rel_err,mean_rel_err\n";
  csv << std::setprecision(9) << to_string(model.precision()) << ',' << to_string(model.activation()) << ',' << batch
      << ',' << c.repeat << ',' << c.threads << ',' << t << ',' << (t > 0 ? batch / t : 0.0) << ','
      << (t > 0 ? flops / t : 0.0) << ',' << worst << ',' << sum / static_cast<double>(batch) << '\n';
  emit(c, out, csv.str());
}

void cmd_io_bench(const RunConfig& c, std::ostream& out) {
  std::string path = c.input;
  if (path.empty()) {
    const fs::path dir = c.output.empty() ? fs::temp_directory_path() / "mcflow_io_bench" : fs::path(c.output);
    fs::create_directories(dir);
    path = (dir / "bench.coll").string();
    std::mt19937_64 rng(c.seed);
    std::uniform_int_distribution<std::uint64_t> len(c.bytes_per_rank / 2, c.bytes_per_rank * 3 / 2);
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<Payload> payloads(static_cast<std::size_t>(c.ranks));
    for (auto& p : payloads) {
      p.resize(len(rng));
      for (auto& b : p) b = static_cast<std::byte>(byte(rng));
    }
    write_collated(path, "bench", DType::bytes, payloads);
  }
  // A supplied file keeps its sidecar when it has one.
  const auto sidecar = index_path(path);
  const auto index = !c.input.empty() && fs::exists(sidecar) ? read_index(sidecar) : build_index(path);
  ReadOptions o;
  o.strategy = parse_read_strategy(c.strategy);
  o.group_size = c.group_size;
  o.open_latency_ms = c.inject_open_latency_ms;
  const auto r = read_with_strategy(path, index, c.ranks, o);
  const bool verified = r.payloads == read_collated(path);
  std::ostringstream csv;
  csv << "strategy,ranks,group_size,groups,opens,peak_concurrent_opens,bytes_read,bytes_scattered,seconds,verified\n";
  const int g = o.strategy == ReadStrategy::grouped ? (c.group_size == 0 ? default_group_size(c.ranks) : c.group_size)
                : o.strategy == ReadStrategy::parallel ? 1 : c.ranks;
  csv << std::setprecision(9) << to_string(o.strategy) << ',' << c.ranks << ',' << g << ',' << r.stats.groups << ','
      << r.stats.opens << ',' << r.stats.peak_concurrent_opens << ',' << r.stats.bytes_read << ','
      << r.stats.bytes_scattered << ',' << r.stats.seconds << ',' << (verified ? 1 : 0) << '\n';
  emit(c, out, csv.str());
  if (!verified) throw IoError("payloads read with " + to_string(o.strategy) + " differ from the file contents");
}

}  // namespace mcflow::cli
