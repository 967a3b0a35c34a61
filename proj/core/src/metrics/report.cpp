#include "mcflow/metrics/report.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "mcflow/common/error.hpp"

namespace mcflow {

PhaseTimes& PhaseTimes::operator+=(const PhaseTimes& o) noexcept {
  construction_s += o.construction_s;
  solving_s += o.solving_s;
  dnn_s += o.dnn_s;
  other_s += o.other_s;
  flops += o.flops;
  return *this;
}

bool RunReport::phases_consistent(double slack) const noexcept {
  return phases.sum() <= loop_time_s * (1.0 + slack);
}

double time_to_solution(const RunReport& r) {
  if (!(r.dof > 0.0)) throw ConfigError("degrees of freedom must be positive");
  if (!(r.flow_cycle > 0.0)) throw ConfigError("flow cycle per loop must be positive");
  return r.loop_time_s / (r.dof * r.flow_cycle);
}

double flops_rate(const RunReport& r) {
  if (!(r.loop_time_s > 0.0)) throw ConfigError("loop time must be positive");
  return static_cast<double>(r.flops_total) / r.loop_time_s;
}

RunReport summarize(std::span<const StepRecord> steps, double dof, double flow_cycle) {
  RunReport r;
  r.dof = dof;
  r.flow_cycle = flow_cycle;
  if (steps.empty()) return r;
  double loop = 0.0;
  for (const auto& s : steps) {
    r.phases += s.phases;
    loop += s.loop_time_s;
  }
  const auto n = static_cast<double>(steps.size());
  r.loop_time_s = loop / n;
  r.flops_total = r.phases.flops / steps.size();
  r.phases.construction_s /= n;
  r.phases.solving_s /= n;
  r.phases.dnn_s /= n;
  r.phases.other_s /= n;
  r.phases.flops = r.flops_total;
  return r;
}

void write_phase_csv(std::ostream& out, std::span<const StepRecord> steps) {
  out << "step,construction_s,solving_s,dnn_s,other_s,flops\n";
  out << std::setprecision(9);
  for (const auto& s : steps) {
    out << s.step << ',' << s.phases.construction_s << ',' << s.phases.solving_s << ',' << s.phases.dnn_s << ','
        << s.phases.other_s << ',' << s.phases.flops << '\n';
  }
}

void write_phase_csv(const std::string& path, std::span<const StepRecord> steps) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_phase_csv(out, steps);
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace mcflow
