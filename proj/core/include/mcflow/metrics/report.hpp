#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mcflow {

/// Wall time split into the four step phases plus the effective operation
/// count (network inference and sparse solves only).
struct PhaseTimes {
  double construction_s = 0.0;
  double solving_s = 0.0;
  double dnn_s = 0.0;
  double other_s = 0.0;
  std::uint64_t flops = 0;

  [[nodiscard]] double sum() const noexcept { return construction_s + solving_s + dnn_s + other_s; }
  PhaseTimes& operator+=(const PhaseTimes& o) noexcept;
};

struct StepRecord {
  int step = 0;
  PhaseTimes phases;
  /// Wall time of the whole step.
  double loop_time_s = 0.0;
};

struct RunReport {
  /// Wall time per time step.
  double loop_time_s = 0.0;
  std::uint64_t flops_total = 0;
  /// Cells times transported variables.
  double dof = 0.0;
  /// Flow time advanced per loop, supplied by the caller.
  double flow_cycle = 1.0;
  PhaseTimes phases;

  /// Phase times add up to no more than the loop time plus `slack` (relative).
  [[nodiscard]] bool phases_consistent(double slack = 0.05) const noexcept;
};

/// loop_time / (dof * flow_cycle), in s/DoF/cycle.
double time_to_solution(const RunReport& report);
/// flops_total / loop_time, in Flop/s.
double flops_rate(const RunReport& report);

/// Per-step averages of a run (loop time and phases), with total FLOPs per step.
RunReport summarize(std::span<const StepRecord> steps, double dof, double flow_cycle);

/// CSV with header step,construction_s,solving_s,dnn_s,other_s,flops.
void write_phase_csv(std::ostream& out, std::span<const StepRecord> steps);
void write_phase_csv(const std::string& path, std::span<const StepRecord> steps);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  void restart() { start_ = std::chrono::steady_clock::now(); }
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace mcflow
