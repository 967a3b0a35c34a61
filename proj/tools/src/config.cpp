#include "mcflow/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "mcflow/common/error.hpp"

namespace mcflow::cli {
namespace {

[[noreturn]] void bad(const std::string& key, const std::string& text, const std::string& why) {
  throw ConfigError("invalid value '" + text + "' for " + key + ": " + why);
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

template <class T>
T parse_integer(const std::string& key, const std::string& text, long long min) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) bad(key, text, "expected an integer");
  if (v < min) bad(key, text, "must be at least " + std::to_string(min));
  if (static_cast<long long>(static_cast<T>(v)) != v) bad(key, text, "out of range");
  return static_cast<T>(v);
}

double parse_real(const std::string& key, const std::string& text, bool positive, bool non_negative = false) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) bad(key, text, "expected a finite number");
  if (positive && !(v > 0.0)) bad(key, text, "must be positive");
  if (non_negative && v < 0.0) bad(key, text, "must be non-negative");
  return v;
}

std::string one_of(const std::string& key, const std::string& text, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (text == a) return text;
  }
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
  bad(key, text, "expected one of " + list);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

struct Entry {
  ConfigKey key;
  Setter set;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table{
      {{"cells", "box mesh cells per direction, nx,ny,nz"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         const auto parts = split(t);
         if (parts.size() != 3) bad(k, t, "expected three comma separated counts");
         for (int i = 0; i < 3; ++i) c.cells[i] = parse_integer<Label>(k, parts[i], 1);
       }},
      {{"refine", "uniform refinement levels"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.refine = parse_integer<int>(k, t, 0); }},
      {{"mesh", "mesh directory to read instead of building a box"},
       [](RunConfig& c, const std::string&, const std::string& t) { c.mesh = t; }},
      {{"ranks", "number of emulated ranks"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.ranks = parse_integer<Label>(k, t, 1); }},
      {{"threads", "worker threads per rank"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.threads = parse_integer<Label>(k, t, 1); }},
      {{"seed", "random seed"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.seed = parse_integer<std::uint64_t>(k, t, 0); }},
      {{"solver", "pcg or gs"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.solver = one_of(k, t, {"pcg", "gs"}); }},
      {{"tolerance", "relative residual tolerance"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.tolerance = parse_real(k, t, true); }},
      {{"max_iterations", "iteration limit"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.max_iterations = parse_integer<int>(k, t, 1); }},
      {{"preconditioner", "none, diagonal or gs[:sweeps]"},
       [](RunConfig& c, const std::string&, const std::string& t) { c.preconditioner = t; }},
      {{"steps", "time steps"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.steps = parse_integer<int>(k, t, 1); }},
      {{"dt", "time step size"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.dt = parse_real(k, t, true); }},
      {{"velocity", "uniform velocity, ux,uy,uz"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         const auto parts = split(t);
         if (parts.size() != 3) bad(k, t, "expected three comma separated components");
         for (int i = 0; i < 3; ++i) c.velocity[i] = parse_real(k, parts[i], false);
       }},
      {{"diffusivity", "scalar diffusivity"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.diffusivity = parse_real(k, t, false, true); }},
      {{"scheme", "convection scheme, upwind or linear"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.scheme = one_of(k, t, {"upwind", "linear"}); }},
      {{"flow_cycle", "flow cycles per loop for time-to-solution"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.flow_cycle = parse_real(k, t, true); }},
      {{"model", "model file"}, [](RunConfig& c, const std::string&, const std::string& t) { c.model = t; }},
      {{"layers", "layer widths of a generated random model, e.g. 20,256,17"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         const auto parts = split(t);
         if (parts.size() < 2) bad(k, t, "need at least two widths");
         c.layers.clear();
         for (const auto& p : parts) c.layers.push_back(parse_integer<std::uint32_t>(k, p, 1));
       }},
      {{"precision", "fp32 or fp16"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         c.precision = one_of(k, t, {"fp32", "fp16", "mixed", "mixed_fp16"});
       }},
      {{"activation", "exact or table"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.activation = one_of(k, t, {"exact", "table"}); }},
      {{"batch", "samples per inference call"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.batch = parse_integer<int>(k, t, 1); }},
      {{"repeat", "timed repetitions"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.repeat = parse_integer<int>(k, t, 1); }},
      {{"strategy", "master, parallel or grouped"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         c.strategy = one_of(k, t, {"master", "master_scatter", "parallel", "grouped"});
       }},
      {{"group_size", "ranks per group for grouped reads (0 = round(sqrt(P)))"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.group_size = parse_integer<int>(k, t, 0); }},
      {{"inject_open_latency_ms", "simulated latency while a file is open"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         c.inject_open_latency_ms = parse_real(k, t, false, true);
       }},
      {{"bytes_per_rank", "mean payload size of the generated benchmark file"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         c.bytes_per_rank = parse_integer<std::uint64_t>(k, t, 1);
       }},
      {{"input", "existing collated file"}, [](RunConfig& c, const std::string&, const std::string& t) { c.input = t; }},
      {{"thread_list", "thread counts to sweep, e.g. 1,2,4"},
       [](RunConfig& c, const std::string& k, const std::string& t) {
         c.thread_list.clear();
         for (const auto& p : split(t)) c.thread_list.push_back(parse_integer<int>(k, p, 1));
         if (c.thread_list.empty()) bad(k, t, "empty list");
       }},
      {{"mode", "strong or weak"},
       [](RunConfig& c, const std::string& k, const std::string& t) { c.mode = one_of(k, t, {"strong", "weak"}); }},
      {{"output", "output directory or file"},
       [](RunConfig& c, const std::string&, const std::string& t) { c.output = t; }},
      {{"report", "CSV report path"}, [](RunConfig& c, const std::string&, const std::string& t) { c.report = t; }},
  };
  return table;
}

std::string scalar_text(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned() || v.is_number_float()) return v.dump();
  throw ConfigError("config key " + key + " must be a number, string or list");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& text) {
  for (const auto& e : entries()) {
    if (key == e.key.name) {
      e.set(config, key, text);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_json(RunConfig& config, const std::string& json_text, const std::string& what) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(what + ": top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    std::string text;
    if (value.is_array()) {
      for (const auto& v : value) text += (text.empty() ? "" : ",") + scalar_text(v, key);
    } else {
      text = scalar_text(value, key);
    }
    set_config_value(config, key, text);
  }
}

void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream s;
  s << in.rdbuf();
  apply_config_json(config, s.str(), path);
}

}  // namespace mcflow::cli
