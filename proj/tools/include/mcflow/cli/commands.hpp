#pragma once

#include <ostream>

#include "mcflow/cli/config.hpp"

namespace mcflow::cli {

// Each command writes its CSV report to `out` (and to config.report when set)
// and throws on failure.
void cmd_generate(const RunConfig& config, std::ostream& out);
void cmd_partition(const RunConfig& config, std::ostream& out);
void cmd_solve(const RunConfig& config, std::ostream& out);
void cmd_simulate(const RunConfig& config, std::ostream& out);
void cmd_infer_bench(const RunConfig& config, std::ostream& out);
void cmd_io_bench(const RunConfig& config, std::ostream& out);
void cmd_breakdown(const RunConfig& config, std::ostream& out);
void cmd_scaling(const RunConfig& config, std::ostream& out);

/// Box mesh from `cells` refined `refine` times, or the mesh in `config.mesh`.
UnstructuredMesh load_mesh(const RunConfig& config);

}  // namespace mcflow::cli
