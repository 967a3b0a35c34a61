#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mcflow/mesh/mesh.hpp"

namespace mcflow::cli {

/// Settings shared by every subcommand. Keys in a config file use the flag
/// names with '-' replaced by '_'.
struct RunConfig {
  std::array<Label, 3> cells{8, 8, 8};
  int refine = 0;
  std::string mesh;
  Label ranks = 1;
  Label threads = 1;
  std::uint64_t seed = 1;

  std::string solver = "pcg";
  double tolerance = 1e-10;
  int max_iterations = 2000;
  std::string preconditioner = "diagonal";

  int steps = 10;
  double dt = 1e-2;
  std::array<double, 3> velocity{0.0, 0.0, 0.0};
  double diffusivity = 1e-2;
  std::string scheme = "upwind";
  double flow_cycle = 1.0;

  std::string model;
  std::vector<std::uint32_t> layers;
  std::string precision = "fp32";
  std::string activation = "table";
  int batch = 1024;
  int repeat = 3;

  std::string strategy = "grouped";
  int group_size = 0;
  double inject_open_latency_ms = 0.0;
  std::uint64_t bytes_per_rank = 1 << 16;
  std::string input;

  std::vector<int> thread_list{1, 2, 4};
  std::string mode = "strong";

  std::string output;
  std::string report;
};

struct ConfigKey {
  const char* name;
  const char* help;
};

/// Every recognised key.
const std::vector<ConfigKey>& config_keys();

/// Parses `text` into the field named `key`. Throws ConfigError for unknown
/// keys and invalid values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& text);

/// Applies a JSON object of key/value pairs; arrays become comma lists.
void apply_config_json(RunConfig& config, const std::string& json_text, const std::string& what = "config");
void apply_config_file(RunConfig& config, const std::string& path);

}  // namespace mcflow::cli
