#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcflow/common/error.hpp"
#include "mcflow/fvm/transport.hpp"
#include "mcflow/metrics/flops.hpp"
#include "mcflow/metrics/report.hpp"
#include "mcflow/nn/mlp.hpp"

namespace mcflow {
namespace {

TEST(TimeToSolution, DirectQuotient) {
  RunReport r;
  r.loop_time_s = 1.0;
  r.dof = 1e6;
  r.flow_cycle = 1.0;
  EXPECT_EQ(time_to_solution(r), 1e-6);
  r.dof = 2e6;
  EXPECT_EQ(time_to_solution(r), 5e-7);
  r.loop_time_s = 3.0;
  r.dof = 4.0;
  r.flow_cycle = 0.5;
  EXPECT_EQ(time_to_solution(r), 3.0 / (4.0 * 0.5));
}

TEST(TimeToSolution, ZeroDenominatorsRejected) {
  RunReport r;
  r.loop_time_s = 1.0;
  r.dof = 0.0;
  EXPECT_THROW(time_to_solution(r), ConfigError);
  r.dof = 10.0;
  r.flow_cycle = 0.0;
  EXPECT_THROW(time_to_solution(r), ConfigError);
  r.flow_cycle = -1.0;
  EXPECT_THROW(time_to_solution(r), ConfigError);
}

TEST(FlopsRate, DirectQuotient) {
  RunReport r;
  r.loop_time_s = 1.0;
  r.flops_total = 2'000'000'000;
  EXPECT_EQ(flops_rate(r), 2e9);
  r.loop_time_s = 0.25;
  EXPECT_EQ(flops_rate(r), 8e9);
  r.flops_total = 0;
  EXPECT_EQ(flops_rate(r), 0.0);
  r.loop_time_s = 0.0;
  EXPECT_THROW(flops_rate(r), ConfigError);
}

TEST(FlopsRate, NetworkOnlyRunMatchesHandCount) {
  const auto m = MlpModel::random({20, 64, 32, 17}, 3);
  const std::uint64_t per_sample = 2 * (20 * 64 + 64 * 32 + 32 * 17);
  ASSERT_EQ(m.flops_per_sample(), per_sample);
  RunReport r;
  r.loop_time_s = 0.5;
  r.flops_total = m.flops_per_sample() * 1000;
  EXPECT_EQ(flops_rate(r), 1000.0 * per_sample / 0.5);
}

TEST(FlopCounter, Additive) {
  FlopCounter a, b;
  a.add(10);
  b.add(32);
  add_flops(&a, 5);
  add_flops(nullptr, 5);
  a += b;
  EXPECT_EQ(a.count(), 47u);
  a.reset();
  EXPECT_EQ(a.count(), 0u);
}

TEST(Summarize, AveragesSteps) {
  std::vector<StepRecord> steps(4);
  for (int i = 0; i < 4; ++i) {
    steps[i].step = i;
    steps[i].phases = {0.1 * (i + 1), 0.2, 0.05, 0.01, static_cast<std::uint64_t>(100 * (i + 1))};
    steps[i].loop_time_s = steps[i].phases.sum();
  }
  const auto r = summarize(steps, 1000.0, 2.0);
  EXPECT_DOUBLE_EQ(r.phases.construction_s, 0.25);
  EXPECT_DOUBLE_EQ(r.phases.solving_s, 0.2);
  EXPECT_EQ(r.flops_total, 250u);
  EXPECT_DOUBLE_EQ(r.loop_time_s, 0.25 + 0.2 + 0.05 + 0.01);
  EXPECT_TRUE(r.phases_consistent());
  EXPECT_DOUBLE_EQ(time_to_solution(r), r.loop_time_s / 2000.0);
  const auto empty = summarize({}, 1.0, 1.0);
  EXPECT_EQ(empty.flops_total, 0u);
}

TEST(RunReport, PhaseConsistency) {
  RunReport r;
  r.loop_time_s = 1.0;
  r.phases = {0.5, 0.3, 0.2, 0.04, 0};
  EXPECT_TRUE(r.phases_consistent());
  r.phases.other_s = 0.1;
  EXPECT_FALSE(r.phases_consistent());
  EXPECT_TRUE(r.phases_consistent(0.2));
}

TEST(PhaseCsv, Schema) {
  std::vector<StepRecord> steps{{0, {0.5, 0.25, 0.125, 0.0, 42}, 0.875}, {1, {1.0, 2.0, 3.0, 4.0, 7}, 10.0}};
  std::ostringstream out;
  write_phase_csv(out, steps);
  EXPECT_EQ(out.str(),
            "step,construction_s,solving_s,dnn_s,other_s,flops\n"
            "0,0.5,0.25,0.125,0,42\n"
            "1,1,2,3,4,7\n");
  const auto p = (std::filesystem::temp_directory_path() / "mcflow_phase.csv").string();
  write_phase_csv(p, steps);
  std::ifstream in(p);
  std::stringstream back;
  back << in.rdbuf();
  EXPECT_EQ(back.str(), out.str());
  std::filesystem::remove(p);
  EXPECT_THROW(write_phase_csv("/nonexistent-dir/x.csv", steps), IoError);
}

TEST(TransportFlops, DeterministicAndIncludeNetworkCount) {
  const auto mesh = build_box_mesh(4, 4, 4);
  const auto model = MlpModel::random({1, 8, 1}, 2);
  TransportSettings s;
  s.source_model = &model;
  auto run = [&] {
    TransportSolver solver(mesh, even_ranges(64, 1));
    auto f = ScalarField::uniform(mesh, 0.1);
    f.values[7] = 1.0;
    return solver.advance(f, s, 3);
  };
  const auto a = run(), b = run();
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].phases.flops, b[k].phases.flops);
    EXPECT_GT(a[k].phases.flops, model.flops_per_sample() * 64);
    const RunReport r{a[k].loop_time_s, 0, 1.0, 1.0, a[k].phases};
    EXPECT_TRUE(r.phases_consistent());
  }
}

}  // namespace
}  // namespace mcflow
