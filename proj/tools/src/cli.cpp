#include "mcflow/cli/cli.hpp"

#include <functional>
#include <map>

#include <CLI11.hpp>

#include "mcflow/cli/commands.hpp"
#include "mcflow/common/error.hpp"

namespace mcflow::cli {
namespace {

struct Subcommand {
  const char* name;
  const char* help;
  std::vector<std::string> keys;
  std::function<void(const RunConfig&, std::ostream&)> run;
};

const std::vector<std::string> kMeshKeys{"cells", "refine", "mesh", "threads", "seed"};
const std::vector<std::string> kTransportKeys{"steps",     "dt",        "velocity",  "diffusivity",    "scheme",
                                              "flow_cycle", "model",    "tolerance", "max_iterations", "preconditioner",
                                              "report"};

std::vector<std::string> join(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<Subcommand> subcommands() {
  const auto simulate_keys = join(kMeshKeys, kTransportKeys);
  return {
      {"generate", "write a mesh, partition and initial field",
       join(kMeshKeys, {"ranks", "layers", "output", "report"}), cmd_generate},
      {"partition", "compare naive and two-level decompositions", join(kMeshKeys, {"ranks", "output", "report"}),
       cmd_partition},
      {"solve", "solve a Poisson problem on the mesh",
       join(kMeshKeys, {"solver", "tolerance", "max_iterations", "preconditioner", "report"}), cmd_solve},
      {"simulate", "run the scalar transport loop", simulate_keys, cmd_simulate},
      {"infer-bench", "time network inference",
       {"model", "layers", "precision", "activation", "batch", "repeat", "threads", "seed", "report"}, cmd_infer_bench},
      {"io-bench", "read a collated file with one strategy",
       {"ranks", "strategy", "group_size", "inject_open_latency_ms", "bytes_per_rank", "input", "output", "seed",
        "report"},
       cmd_io_bench},
      {"breakdown", "per-step phase timings of the transport loop", simulate_keys, cmd_breakdown},
      {"scaling", "thread scaling of the transport loop", join(simulate_keys, {"thread_list", "mode"}), cmd_scaling},
  };
}

std::string flag_name(std::string key) {
  for (auto& ch : key) {
    if (ch == '_') ch = '-';
  }
  return "--" + key;
}

const char* help_for(const std::string& key) {
  for (const auto& k : config_keys()) {
    if (key == k.name) return k.help;
  }
  return "";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mcflow: mesh decomposition, sparse kernels, inference and parallel I/O benchmarks", "mcflow"};
  app.require_subcommand(1);

  const auto subs = subcommands();
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> config_path;
  std::vector<CLI::App*> apps;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", config_path[s.name], "JSON config file; flags override its values");
    for (const auto& key : s.keys) {
      options[s.name][key] = sub->add_option(flag_name(key), raw[s.name][key], help_for(key));
    }
    apps.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return exit_ok;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return exit_usage;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!apps[i]->parsed()) continue;
    const auto& s = subs[i];
    RunConfig config;
    try {
      if (!config_path[s.name].empty()) apply_config_file(config, config_path[s.name]);
      for (const auto& key : s.keys) {
        if (options[s.name][key]->count() > 0) set_config_value(config, key, raw[s.name][key]);
      }
    } catch (const ConfigError& e) {
      err << "mcflow " << s.name << ": " << e.what() << '\n';
      return exit_usage;
    }
    try {
      s.run(config, out);
    } catch (const ConfigError& e) {
      err << "mcflow " << s.name << ": " << e.what() << '\n';
      return exit_usage;
    } catch (const std::exception& e) {
      err << "mcflow " << s.name << ": " << e.what() << '\n';
      return exit_failure;
    }
    return exit_ok;
  }
  return exit_usage;
}

}  // namespace mcflow::cli
