// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mcflow/common/thread_pool.hpp"
#include "mcflow/fvm/operators.hpp"
#include "mcflow/fvm/schedule.hpp"
#include "mcflow/fvm/transport.hpp"
#include "mcflow/io/collated.hpp"
#include "mcflow/io/mesh_io.hpp"
#include "mcflow/io/read_strategy.hpp"
#include "mcflow/mesh/geometry.hpp"
#include "mcflow/mesh/refine.hpp"
#include "mcflow/metrics/report.hpp"
#include "mcflow/nn/gelu.hpp"
#include "mcflow/nn/mlp.hpp"
#include "mcflow/partition/two_level.hpp"
#include "mcflow/sparse/kernels.hpp"
#include "mcflow/sparse/solvers.hpp"
#include "mcflow/sparse/triplet_io.hpp"
#include "support/dense.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace mcflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string details;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// ---------------------------------------------------------------- 1

struct Entry {
  std::uint64_t row, col;
  double value;
};

std::vector<Entry> ldu_entries(const LduMatrix& m) {
  const auto& a = m.addressing();
  std::vector<Entry> e;
  e.reserve(static_cast<std::size_t>(a.nnz()));
  for (Label i = 0; i < m.n_cells(); ++i) e.push_back({std::uint64_t(i), std::uint64_t(i), m.diag()[i]});
  for (Label f = 0; f < m.n_faces(); ++f) {
    e.push_back({std::uint64_t(a.owner[f]), std::uint64_t(a.neighbour[f]), m.upper()[f]});
    e.push_back({std::uint64_t(a.neighbour[f]), std::uint64_t(a.owner[f]), m.lower()[f]});
  }
  std::sort(e.begin(), e.end(), [](const Entry& x, const Entry& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  return e;
}

std::vector<double> entry_multiply(const std::vector<Entry>& e, std::size_t n, std::span<const double> x) {
  std::vector<long double> acc(n, 0.0L);
  for (const auto& t : e) acc[t.row] += static_cast<long double>(t.value) * x[t.col];
  return {acc.begin(), acc.end()};
}

std::vector<double> direct_solve(const std::vector<Entry>& e, std::size_t n, const std::vector<double>& b) {
  if (n <= 1000) {
    test::Dense d(n);
    for (const auto& t : e) d(t.row, t.col) = t.value;
    return test::dense_solve(d, b);
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(e.size());
  for (const auto& t : e) trip.emplace_back(static_cast<int>(t.row), static_cast<int>(t.col), t.value);
  Eigen::SparseMatrix<double> s(static_cast<int>(n), static_cast<int>(n));
  s.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(s);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("LDLT factorisation failed");
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd x = ldlt.solve(rhs);
  return {x.data(), x.data() + x.size()};
}

Outcome sparse_oracle() {
  struct Dims {
    Label nx, ny, nz;
  };
  const std::vector<Dims> dims = {{3, 3, 3},    {4, 4, 4},    {5, 3, 7},    {6, 6, 6},    {2, 9, 4},
                                  {7, 7, 7},    {8, 8, 8},    {10, 5, 9},   {9, 9, 9},    {10, 10, 10},
                                  {12, 12, 12}, {16, 16, 16}, {20, 16, 12}, {24, 24, 24}, {32, 16, 8},
                                  {28, 28, 28}, {32, 32, 16}, {30, 20, 32}, {32, 32, 32}, {24, 32, 32},
                                  {32, 24, 32}, {32, 32, 32}};
  const Label thread_choices[] = {1, 2, 3, 4, 6, 8};
  const auto kinds = {Preconditioner::none(), Preconditioner::diagonal(), Preconditioner::gs(1)};
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  int bad_recon = 0, dense_checked = 0;
  double worst_spmv = 0.0, worst_pcg = 0.0;
  int unconverged = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const auto [nx, ny, nz] = dims[k];
    const Vec3 len{0.5 + u01(rng), 0.5 + u01(rng), 0.5 + u01(rng)};
    const auto base = build_box_mesh(nx, ny, nz, len);
    const Label ranks = 1 + static_cast<Label>(rng() % 2);
    const Label threads = thread_choices[rng() % std::size(thread_choices)];
    DecomposeOptions dopt;
    dopt.seed = rng();
    const auto part = two_level_decompose(base, ranks, threads, dopt);
    const auto mesh = apply_partition(base, part);
    const auto geom = compute_geometry(mesh);
    const auto sched = build_face_schedule(mesh, part);
    ThreadPool pool(part.n_parts());

    std::vector<double> gamma(static_cast<std::size_t>(mesh.n_faces()));
    for (auto& g : gamma) g = 0.5 + 1.5 * u01(rng);
    auto field = ScalarField::uniform(mesh, 0.0);
    for (std::size_t p = 0; p < field.boundary.size(); ++p) {
      field.boundary[p] = (p == 0 || rng() % 2) ? BoundaryCondition::fixed(u01(rng)) : BoundaryCondition::zero_gradient();
    }
    AssemblyOptions aopt;
    aopt.pool = &pool;
    auto spd = assemble_laplacian(mesh, geom, gamma, field, sched, aopt).matrix;
    if (k % 2 == 1) {
      const double dt = 0.05 + u01(rng);
      for (Label c = 0; c < mesh.n_cells(); ++c) spd.diag()[c] += geom.cell_volumes[c] / dt;
    }
    aopt.addressing = spd.addressing_ptr();
    const Vec3 vel{u01(rng) - 0.5, u01(rng) - 0.5, u01(rng) - 0.5};
    const auto conv = assemble_divergence(mesh, geom, uniform_flux(geom, vel), ConvectionScheme::upwind, field, sched, aopt);
    LduMatrix general = spd;
    for (Label c = 0; c < mesh.n_cells(); ++c) general.diag()[c] += conv.matrix.diag()[c];
    for (Label f = 0; f < mesh.n_internal_faces(); ++f) {
      general.lower()[f] += conv.matrix.lower()[f];
      general.upper()[f] += conv.matrix.upper()[f];
    }

    const auto n = static_cast<std::size_t>(mesh.n_cells());
    const KernelContext kc{&pool, nullptr};
    for (const LduMatrix* m : {&spd, &general}) {
      auto bs = build_block_map(mesh, part);
      refresh_values(*m, bs.map, bs.matrix, &pool);
      const auto entries = ldu_entries(*m);
      const auto trip = to_triplets(bs.matrix);
      bool same = trip.values.size() == entries.size();
      for (std::size_t i = 0; same && i < entries.size(); ++i) {
        same = trip.rows[i] == entries[i].row && trip.cols[i] == entries[i].col && trip.values[i] == entries[i].value;
      }
      if (n <= 1000) {
        same = same && to_dense(*m) == to_dense(bs.matrix);
        ++dense_checked;
      }
      if (!same) ++bad_recon;

      const auto x = test::random_vector(n, rng());
      const auto y = spmv(bs.matrix, x, kc);
      const auto ref = n <= 1000 ? [&] {
        test::Dense d(n);
        for (const auto& t : entries) d(t.row, t.col) = t.value;
        return d.mul(x);
      }()
                                 : entry_multiply(entries, n, x);
      worst_spmv = std::max(worst_spmv, test::rel_diff(y, ref));

      if (m == &spd) {
        const auto b = test::random_vector(n, rng());
        std::vector<double> sol(n, 0.0);
        SolverOptions so;
        so.tolerance = 1e-13;
        so.max_iterations = 20000;
        so.preconditioner = *(kinds.begin() + static_cast<std::ptrdiff_t>(k % 3));
        const auto res = pcg_solve(bs.matrix, b, sol, so, kc);
        if (!res.converged) ++unconverged;
        worst_pcg = std::max(worst_pcg, test::rel_diff(sol, direct_solve(entries, n, b)));
      }
    }
  }
  Outcome o;
  o.pass = bad_recon == 0 && worst_spmv <= 1e-13 && worst_pcg <= 1e-8 && unconverged == 0;
  std::ostringstream s;
  s << dims.size() << " meshes x 2 matrices, reconstruction mismatches " << bad_recon << " (" << dense_checked
    << " also dense), spmv rel " << fmt("%.2e", worst_spmv) << ", pcg vs direct rel " << fmt("%.2e", worst_pcg)
    << ", unconverged " << unconverged;
  o.details = s.str();
  return o;
}

// ---------------------------------------------------------------- 2

Outcome smoother_neglect() {
  double worst = 0.0, worst_mean = 0.0, worst_last = 0.0;
  std::string where;
  for (int n : {16, 32}) {
    for (Label t : {2, 4, 8}) {
      const auto p = test::laplacian_problem(n, t);
      const auto& ldu = p.system.matrix;
      auto seq = build_block_map(ldu.addressing(), even_ranges(ldu.n_cells(), 1));
      auto hyb = build_block_map(p.mesh, p.partition);
      refresh_values(ldu, seq.map, seq.matrix);
      refresh_values(ldu, hyb.map, hyb.matrix);
      ThreadPool pool(t);
      const KernelContext kc{&pool, nullptr};
      const auto nn = static_cast<std::size_t>(ldu.n_cells());
      const auto b = test::random_vector(nn, 7);
      std::vector<double> xs(nn, 0.0), xh(nn, 0.0);
      double rs = residual_norm(seq.matrix, xs, b), rh = residual_norm(hyb.matrix, xh, b, kc);
      double log_dev = 0.0, last = 0.0;
      for (int k = 0; k < 20; ++k) {
        gauss_seidel_sweep(seq.matrix, b, xs, 1);
        gauss_seidel_sweep(hyb.matrix, b, xh, 1, kc);
        const double rs1 = residual_norm(seq.matrix, xs, b), rh1 = residual_norm(hyb.matrix, xh, b, kc);
        const double fs = rs1 / rs, fh = rh1 / rh;
        const double dev = std::abs(fh - fs) / fs;
        log_dev += std::log(fh / fs);
        last = dev;
        if (dev > worst) {
          worst = dev;
          where = std::to_string(n) + "^3 t=" + std::to_string(t) + " sweep " + std::to_string(k + 1);
        }
        rs = rs1;
        rh = rh1;
      }
      worst_mean = std::max(worst_mean, std::expm1(log_dev / 20.0));
      worst_last = std::max(worst_last, last);
    }
  }
  Outcome o;
  o.pass = worst < 1e-3;
  o.details = "max per-sweep factor deviation " + fmt("%.3f%%", 100.0 * worst) + " at " + where +
              ", worst geometric-mean increase " + fmt("%.3f%%", 100.0 * worst_mean) + ", worst sweep-20 deviation " +
              fmt("%.3f%%", 100.0 * worst_last) + " (limit 0.1%)";
  return o;
}

// ---------------------------------------------------------------- 3

UnstructuredMesh shuffled(const UnstructuredMesh& m, std::uint64_t seed) {
  std::vector<Label> perm(static_cast<std::size_t>(m.n_cells()));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
  return renumber_cells(m, perm);
}

Outcome partition_quality() {
  struct Case {
    Label nx, ny, nz, ranks, threads;
  };
  const Case cases[] = {{8, 8, 8, 1, 4}, {16, 16, 16, 1, 8}, {16, 16, 16, 2, 4}, {24, 24, 24, 4, 4}, {32, 16, 16, 2, 8}};
  bool pass = true;
  double worst_red = 1.0, worst_bal = 0.0, worst_lex = 1.0;
  for (const auto& c : cases) {
    const auto lex = build_box_mesh(c.nx, c.ny, c.nz);
    for (int variant = 0; variant < 2; ++variant) {
      const auto mesh = variant == 0 ? shuffled(lex, 99) : lex;
      const auto naive = partition_stats(mesh, index_block_decompose(mesh, c.ranks, c.threads));
      const auto ours = partition_stats(mesh, two_level_decompose(mesh, c.ranks, c.threads));
      const double red = 1.0 - ours.offdiag_fraction / naive.offdiag_fraction;
      if (variant == 0) {
        worst_red = std::min(worst_red, red);
        worst_bal = std::max(worst_bal, ours.balance());
        pass = pass && red >= 0.5 && ours.balance() <= 1.05;
      } else {
        worst_lex = std::min(worst_lex, red);
        worst_bal = std::max(worst_bal, ours.balance());
        pass = pass && ours.balance() <= 1.05;
      }
    }
  }
  Outcome o;
  o.pass = pass;
  o.details = "offdiag reduction vs index blocks, unordered numbering: min " + fmt("%.1f%%", 100.0 * worst_red) +
              " (need >= 50%); balance max/mean " + fmt("%.4f", worst_bal) +
              " (limit 1.05); lexicographic box numbering (info): min " + fmt("%.1f%%", 100.0 * worst_lex);
  return o;
}

// ---------------------------------------------------------------- 4

Outcome conversion_cost() {
  const auto p = test::laplacian_problem(32, 4);
  auto bs = build_block_map(p.mesh, p.partition);
  refresh_values(p.system.matrix, bs.map, bs.matrix);
  const auto n = static_cast<std::size_t>(p.mesh.n_cells());
  const auto x = test::random_vector(n, 3);
  std::vector<double> y(n);
  for (int w = 0; w < 5; ++w) {
    refresh_values(p.system.matrix, bs.map, bs.matrix);
    spmv(bs.matrix, x, y);
  }
  std::vector<double> tr, ts;
  for (int r = 0; r < 20; ++r) {
    Stopwatch a;
    refresh_values(p.system.matrix, bs.map, bs.matrix);
    tr.push_back(a.seconds());
    Stopwatch b;
    spmv(bs.matrix, x, y);
    ts.push_back(b.seconds());
  }
  const double ratio = median(tr) / median(ts);
  Outcome o;
  o.pass = ratio <= 2.0;
  o.details = "32^3 median refresh " + fmt("%.1f us", 1e6 * median(tr)) + ", spmv " + fmt("%.1f us", 1e6 * median(ts)) +
              ", ratio " + fmt("%.2f", ratio) + " (limit 2)";
  return o;
}

// ---------------------------------------------------------------- 5

Outcome gelu_tabulation() {
  const auto& t32 = gelu_table(CoefficientPrecision::fp32);
  const int points = 1'000'000;
  double e32 = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -3.0 + 6.0 * i / (points - 1);
    const auto xf = static_cast<float>(x);
    e32 = std::max(e32, std::abs(static_cast<double>(t32(xf)) - gelu_exact(xf)));
  }
  double clamp = 0.0, at = 0.0;
  for (int i = 0; i < points; ++i) {
    const double mag = 3.0 + 7.0 * (i + 1) / points;
    for (double x : {-mag, mag}) {
      const auto xf = static_cast<float>(x);
      if (std::abs(xf) <= 3.0f) continue;
      const double e = std::abs(static_cast<double>(t32(xf)) - gelu_exact(xf));
      if (e > clamp) {
        clamp = e;
        at = xf;
      }
    }
  }
  Outcome o;
  o.pass = e32 <= 1e-5 && clamp <= 5e-3 && std::abs(std::abs(at) - 3.0) < 0.01;
  o.details = "fp32 table max error on [-3,3] " + fmt("%.2e", e32) + " (limit 1e-5); clamp max " + fmt("%.2e", clamp) +
              " at x=" + fmt("%.4f", at) + " (limit 5e-3, near |x|=3)";
  return o;
}

// ---------------------------------------------------------------- 6

Outcome mixed_precision() {
  const std::vector<std::vector<std::uint32_t>> shapes = {
      {20, 2048, 4096, 2048, 1024, 512, 17}, {20, 256, 512, 256, 128, 17}, {4, 64, 64, 8}, {4, 64, 64, 1}};
  const std::size_t samples = 10'000;
  double worst_max = 0.0, worst_mean = 0.0;
  std::ostringstream s;
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    const auto ref = MlpModel::random(shapes[k], 1000 + k);
    const auto mixed = ref.converted(Precision::mixed_fp16);
    const std::size_t in = ref.input_width();
    std::mt19937_64 rng(77 + k);
    std::normal_distribution<float> z(0.0f, 1.0f);
    std::vector<float> x(samples * in);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = ref.mean()[i % in] + ref.stddev()[i % in] * z(rng);
    const auto y32 = infer(ref, x, samples);
    const auto y16 = infer(mixed, x, samples);
    const std::size_t out = ref.output_width();
    double mx = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < out; ++j) {
        const double a = y32[i * out + j], b = y16[i * out + j];
        num += (a - b) * (a - b);
        den += a * a;
      }
      const double e = std::sqrt(num / den);
      mx = std::max(mx, e);
      sum += e;
    }
    // A single output makes the per-sample ratio |dy| / |y|, unbounded as y
    // crosses zero; that model is reported but not gated.
    const bool gated = out > 1;
    if (gated) {
      worst_max = std::max(worst_max, mx);
      worst_mean = std::max(worst_mean, sum / samples);
    }
    s << (k ? "; " : "") << ref.layer_count() << " layers " << shapes[k][1] << " wide, " << out
      << (out > 1 ? " outputs" : " output (info)") << ": max " << fmt("%.3f%%", 100 * mx) << " mean "
      << fmt("%.3f%%", 100 * sum / samples);
  }
  Outcome o;
  o.pass = worst_max <= 0.02 && worst_mean <= 0.005;
  o.details = s.str() + " over " + std::to_string(samples) + " samples (limits 2%, 0.5%)";
  return o;
}

// ---------------------------------------------------------------- 7

Outcome assembly_determinism() {
  const auto base = build_box_mesh(12, 12, 12, {1.0, 0.8, 1.3});
  const auto part = two_level_decompose(base, 1, 8);
  const auto mesh = apply_partition(base, part);
  const auto geom = compute_geometry(mesh);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<double> gamma(static_cast<std::size_t>(mesh.n_faces()));
  for (auto& g : gamma) g = u(rng);
  std::vector<double> flux(static_cast<std::size_t>(mesh.n_faces()));
  for (auto& f : flux) f = u(rng) - 1.0;
  auto field = ScalarField::uniform(mesh, 0.0);
  for (auto& v : field.values) v = u(rng);
  for (std::size_t p = 0; p < field.boundary.size(); ++p) {
    field.boundary[p] = p % 2 ? BoundaryCondition::fixed(u(rng)) : BoundaryCondition::zero_gradient();
  }

  struct Result {
    FvSystem lap, div;
    std::vector<Vec3> grad;
  };
  std::vector<Result> results;
  std::int64_t conflicts = 0, writes = 0;
  for (Label t : {1, 2, 4, 8}) {
    // Regions for t threads are unions of consecutive 8-way regions, so the
    // cell numbering is the same for every t.
    std::vector<CellRange> ranges;
    const Label merge = 8 / t;
    for (Label r = 0; r < t; ++r) ranges.push_back({part.ranges[r * merge].begin, part.ranges[r * merge + merge - 1].end});
    const auto sched = build_face_schedule(mesh, ranges);
    ThreadPool pool(t);
    WriteProbe probe(mesh.n_cells());
    AssemblyOptions opt;
    opt.pool = &pool;
    opt.probe = &probe;
    Result r;
    r.lap = assemble_laplacian(mesh, geom, gamma, field, sched, opt);
    opt.addressing = r.lap.matrix.addressing_ptr();
    r.div = assemble_divergence(mesh, geom, flux, ConvectionScheme::linear, field, sched, opt);
    r.grad = compute_gradient(mesh, geom, field, sched, opt);
    conflicts += probe.conflicts();
    writes += probe.writes();
    results.push_back(std::move(r));
  }
  bool same = true;
  for (std::size_t k = 1; k < results.size(); ++k) {
    const auto& a = results[0];
    const auto& b = results[k];
    same = same && a.lap.matrix == b.lap.matrix && a.div.matrix == b.div.matrix;
    same = same && std::memcmp(a.lap.source.data(), b.lap.source.data(), a.lap.source.size() * sizeof(double)) == 0;
    same = same && std::memcmp(a.div.source.data(), b.div.source.data(), a.div.source.size() * sizeof(double)) == 0;
    same = same && std::memcmp(a.grad.data(), b.grad.data(), a.grad.size() * sizeof(Vec3)) == 0;
  }
  Outcome o;
  o.pass = same && conflicts == 0 && writes > 0;
  o.details = std::string("laplacian, divergence, gradient bitwise ") + (same ? "identical" : "DIFFERENT") +
              " for t=1,2,4,8; probe writes " + std::to_string(writes) + ", conflicts " + std::to_string(conflicts);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome io_strategies() {
  const fs::path dir = fs::temp_directory_path() / ("mcflow_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  bool pass = true;
  std::ostringstream s;
  std::mt19937_64 rng(8);
  for (int P : {4, 9, 16, 64}) {
    std::vector<Payload> payloads(static_cast<std::size_t>(P));
    for (auto& p : payloads) {
      p.resize(8 * (1 + rng() % 512));
      for (auto& b : p) b = static_cast<std::byte>(rng());
    }
    const std::string path = (dir / ("field_" + std::to_string(P))).string();
    write_collated(path, "psi", DType::f64, payloads);
    const auto idx = build_index(path);
    const int g = default_group_size(P);
    s << (P == 4 ? "" : "; ") << "P=" << P << " peaks";
    for (auto [strategy, expect] : {std::pair{ReadStrategy::master_scatter, 1}, std::pair{ReadStrategy::parallel, P},
                                    std::pair{ReadStrategy::grouped, P / g}}) {
      ReadOptions ro;
      ro.strategy = strategy;
      ro.open_latency_ms = 50.0;
      const auto r = read_with_strategy(path, idx, P, ro);
      pass = pass && r.payloads == payloads && r.stats.peak_concurrent_opens == expect && r.stats.opens == expect;
      s << ' ' << r.stats.peak_concurrent_opens << (r.payloads == payloads ? "" : "(payload mismatch)");
    }
  }

  const auto coarse = build_box_mesh(4, 4, 4, {1.0, 2.0, 0.5});
  const std::string cdir = (dir / "coarse").string(), fdir = (dir / "fine").string();
  write_mesh(cdir, coarse);
  write_mesh(fdir, refine_uniform(coarse, 2));
  const auto runtime = startup_with_runtime_refinement(cdir, 2);
  const auto full = read_mesh(fdir);
  const bool equal = canonically_equal(runtime.mesh, full);
  const auto coarse_bytes = mesh_directory_bytes(cdir), fine_bytes = mesh_directory_bytes(fdir);
  pass = pass && equal && runtime.bytes_read == coarse_bytes;
  s << "; runtime refinement read " << runtime.bytes_read << " B (coarse files " << coarse_bytes << " B, refined files "
    << fine_bytes << " B), mesh " << (equal ? "canonically equal" : "DIFFERENT");
  fs::remove_all(dir);
  Outcome o;
  o.pass = pass;
  o.details = s.str();
  return o;
}

// ---------------------------------------------------------------- 9

double manufactured_error(Label n) {
  const auto m = build_box_mesh(n, n, n);
  const auto g = compute_geometry(m);
  auto exact = [](const Vec3& p) { return std::sin(p.x) * std::sin(p.y) * std::sin(p.z); };
  auto field = ScalarField::uniform(m, 0.0);
  for (std::size_t p = 0; p < m.patches().size(); ++p) {
    const auto& patch = m.patches()[p];
    std::vector<double> vals(static_cast<std::size_t>(patch.size));
    for (Label k = 0; k < patch.size; ++k) vals[static_cast<std::size_t>(k)] = exact(g.face_centroids[patch.start + k]);
    field.boundary[p] = BoundaryCondition::fixed_faces(std::move(vals));
  }
  const std::vector<double> gamma(static_cast<std::size_t>(m.n_faces()), 1.0);
  const auto ranges = even_ranges(m.n_cells(), 1);
  auto sys = assemble_laplacian(m, g, gamma, field, build_face_schedule(m, ranges));
  for (std::size_t c = 0; c < sys.source.size(); ++c) sys.source[c] += 3.0 * exact(g.cell_centroids[c]) * g.cell_volumes[c];
  auto block = build_block_map(sys.matrix.addressing(), ranges);
  refresh_values(sys.matrix, block.map, block.matrix);
  std::vector<double> x(sys.source.size(), 0.0);
  if (!pcg_solve(block.matrix, sys.source, x, {1e-12, 5000, {}}).converged) return NAN;
  double e2 = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double e = x[c] - exact(g.cell_centroids[c]);
    e2 += e * e * g.cell_volumes[c];
  }
  return std::sqrt(e2);
}

Outcome fv_verification() {
  const double e8 = manufactured_error(8), e16 = manufactured_error(16), e32 = manufactured_error(32);
  const double o1 = std::log2(e8 / e16), o2 = std::log2(e16 / e32);
  const bool order_ok = o1 >= 1.8 && o1 <= 2.2 && o2 >= 1.8 && o2 <= 2.2;

  const auto base = build_box_mesh(16, 16, 16);
  const auto part = two_level_decompose(base, 1, 4);
  const auto mesh = apply_partition(base, part);
  ThreadPool pool(4);
  TransportSolver solver(mesh, part.ranges, &pool);
  auto field = ScalarField::uniform(mesh, 0.0);
  field.values = test::random_vector(field.values.size(), 11, 0.0, 1.0);
  const double before = field_integral(field, solver.geometry());
  TransportSettings ts;
  ts.diffusivity = 0.05;
  solver.advance(field, ts, 50);
  const double drift = std::abs(field_integral(field, solver.geometry()) - before) / std::abs(before);

  Outcome o;
  o.pass = order_ok && drift <= 1e-10;
  o.details = "L2 error 8^3/16^3/32^3 " + fmt("%.3e", e8) + "/" + fmt("%.3e", e16) + "/" + fmt("%.3e", e32) +
              ", orders " + fmt("%.3f", o1) + ", " + fmt("%.3f", o2) + " (need [1.8,2.2]); diffusion drift over 50 steps " +
              fmt("%.2e", drift) + " (limit 1e-10)";
  return o;
}

// ---------------------------------------------------------------- 10

Outcome metrics_identities() {
  bool pass = true;
  RunReport r;
  r.loop_time_s = 0.75;
  r.dof = 3e6;
  r.flow_cycle = 0.5;
  r.flops_total = 4'500'000'000;
  pass = pass && time_to_solution(r) == 5e-7 && flops_rate(r) == 6e9;
  r.loop_time_s = 0.5;
  r.dof = 1048576.0;
  r.flow_cycle = 0.25;
  r.flops_total = 3'000'000'000;
  pass = pass && time_to_solution(r) == 1.9073486328125e-06 && flops_rate(r) == 6e9;

  const std::vector<std::vector<std::uint32_t>> shapes = {
      {20, 2048, 4096, 2048, 1024, 512, 17}, {4, 64, 64, 1}, {1, 1}, {3, 7, 5}};
  for (const auto& d : shapes) {
    std::uint64_t hand = 0;
    for (std::size_t l = 0; l + 1 < d.size(); ++l) hand += 2ull * d[l] * d[l + 1];
    pass = pass && MlpModel(d).flops_per_sample() == hand;
  }

  // A network whose output is zero leaves the solve unchanged, so the step's
  // FLOP total differs from the network-free step by exactly cells x sum 2mn.
  const auto mesh = build_box_mesh(6, 6, 6);
  const MlpModel zero({4, 16, 8, 1});
  const std::uint64_t per_sample = 2ull * (4 * 16 + 16 * 8 + 8 * 1);
  std::uint64_t with = 0, without = 0;
  for (const MlpModel* model : {static_cast<const MlpModel*>(nullptr), &zero}) {
    TransportSolver solver(mesh, even_ranges(mesh.n_cells(), 1));
    auto field = ScalarField::uniform(mesh, 0.0);
    field.values = test::random_vector(field.values.size(), 4, 0.0, 1.0);
    TransportSettings ts;
    ts.source_model = model;
    (model ? with : without) = solver.step(field, ts).phases.flops;
  }
  const std::uint64_t nn = with - without;
  pass = pass && nn == per_sample * static_cast<std::uint64_t>(mesh.n_cells());

  Outcome o;
  o.pass = pass;
  o.details = "TTS and Flop/s match hand values; NN FLOPs per step " + std::to_string(nn) + " = " +
              std::to_string(mesh.n_cells()) + " cells x " + std::to_string(per_sample);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "sparse oracle equivalence", 120, sparse_oracle},
      {2, "smoother neglect", 60, smoother_neglect},
      {3, "partition quality", 60, partition_quality},
      {4, "conversion cost", 60, conversion_cost},
      {5, "gelu tabulation", 10, gelu_tabulation},
      {6, "mixed precision accuracy", 120, mixed_precision},
      {7, "assembly determinism", 60, assembly_determinism},
      {8, "io strategy equivalence", 60, io_strategies},
      {9, "fv verification", 180, fv_verification},
      {10, "metrics identities", 10, metrics_identities},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Stopwatch watch;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = watch.seconds();
    const bool in_time = t <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %d %s: %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.details.c_str(), t,
                in_time ? "" : ", over time budget");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
