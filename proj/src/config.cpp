#include "shortcut/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace shortcut {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(path, "expected a non-negative integer");
}

std::size_t as_size(const json& v, const std::string& path) {
  return static_cast<std::size_t>(as_u64(v, path));
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  return v;
}

/// Reads keys from one JSON object and rejects any it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  [[nodiscard]] const json* find(const std::string& key) {
    known_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  [[nodiscard]] const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) throw ConfigError(field(key), "required field is missing");
    return *v;
  }

  [[nodiscard]] std::string field(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!known_.contains(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

Method parse_method(const std::string& s, const std::string& path) {
  if (s == "standard") return Method::standard;
  if (s == "naive-adaptive") return Method::naive_adaptive;
  if (s == "shortcut") return Method::shortcut;
  throw ConfigError(path, "unknown method '" + s + "' (standard | naive-adaptive | shortcut)");
}

TargetConfig parse_target(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  TargetConfig t;
  t.name = as_string(r.require("name"), r.field("name"));
  if (const json* v = r.find("variances")) {
    const auto& arr = as_array(*v, r.field("variances"));
    for (std::size_t i = 0; i < arr.size(); ++i) {
      t.variances.push_back(as_double(arr[i], index(r.field("variances"), i)));
    }
  }
  r.finish();
  return t;
}

StandardBlock parse_block(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  StandardBlock b;
  b.w = as_double(r.require("w"), r.field("w"));
  b.updates = as_size(r.require("updates"), r.field("updates"));
  r.finish();
  return b;
}

SequenceSpec parse_spec(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  SequenceSpec s;
  s.w = as_double(r.require("w"), r.field("w"));
  s.group_size = as_size(r.require("L"), r.field("L"));
  s.group_count = as_size(r.require("M"), r.field("M"));
  s.min_rejections = as_size(r.require("l"), r.field("l"));
  s.max_rejections = as_size(r.require("h"), r.field("h"));
  r.finish();
  return s;
}

NaiveAdaptiveSettings parse_naive(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  NaiveAdaptiveSettings n;
  if (const json* v = r.find("w_small")) n.w_small = as_double(*v, r.field("w_small"));
  if (const json* v = r.find("w_large")) n.w_large = as_double(*v, r.field("w_large"));
  if (const json* v = r.find("window")) n.window = as_size(*v, r.field("window"));
  if (const json* v = r.find("threshold")) n.threshold = as_size(*v, r.field("threshold"));
  r.finish();
  return n;
}

EstimatorConfig parse_estimator(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  EstimatorConfig e;
  if (const json* v = r.find("states")) {
    const std::string s = as_string(*v, r.field("states"));
    if (s == "all") {
      e.states = EstimatorStates::all;
    } else if (s == "final") {
      e.states = EstimatorStates::final_only;
    } else {
      throw ConfigError(r.field("states"), "expected 'all' or 'final'");
    }
  }
  if (const json* v = r.find("max_lag")) e.max_lag = as_size(*v, r.field("max_lag"));
  if (const json* v = r.find("variance_mode")) {
    const std::string s = as_string(*v, r.field("variance_mode"));
    if (s == "known") {
      e.variance_mode = VarianceMode::known;
    } else if (s == "sample") {
      e.variance_mode = VarianceMode::sample;
    } else {
      throw ConfigError(r.field("variance_mode"), "expected 'known' or 'sample'");
    }
  }
  if (const json* v = r.find("burn_in")) e.burn_in = as_size(*v, r.field("burn_in"));
  if (const json* v = r.find("track")) {
    const auto& arr = as_array(*v, r.field("track"));
    e.track.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      e.track.push_back(as_size(arr[i], index(r.field("track"), i)));
    }
  }
  r.finish();
  return e;
}

OutputConfig parse_output(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  OutputConfig o;
  if (const json* v = r.find("summary")) o.summary = as_string(*v, r.field("summary"));
  if (const json* v = r.find("trace_csv")) o.trace_csv = as_string(*v, r.field("trace_csv"));
  if (const json* v = r.find("trace_mode")) {
    const std::string s = as_string(*v, r.field("trace_mode"));
    if (s == "full") {
      o.trace_mode = TraceMode::full;
    } else if (s == "deduplicated") {
      o.trace_mode = TraceMode::deduplicated;
    } else {
      throw ConfigError(r.field("trace_mode"), "expected 'full' or 'deduplicated'");
    }
  }
  if (const json* v = r.find("sequences_csv")) {
    o.sequences_csv = as_string(*v, r.field("sequences_csv"));
  }
  if (const json* v = r.find("walk_csv")) o.walk_csv = as_string(*v, r.field("walk_csv"));
  if (const json* v = r.find("walk_sequences")) {
    o.walk_sequences = as_size(*v, r.field("walk_sequences"));
  }
  r.finish();
  return o;
}

std::size_t target_dimension(const TargetConfig& t) {
  if (t.name == "mixture1d") return 1;
  if (t.name == "mvgauss7") return 7;
  if (t.name == "funnel") return 10;
  if (t.name == "diag-gauss") return t.variances.size();
  throw ConfigError("target.name", "unknown target '" + t.name +
                                       "' (mixture1d | mvgauss7 | funnel | diag-gauss)");
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::standard: return "standard";
    case Method::naive_adaptive: return "naive-adaptive";
    case Method::shortcut: return "shortcut";
  }
  return "?";
}

std::string to_string(VarianceMode mode) {
  return mode == VarianceMode::known ? "known" : "sample";
}

void ExperimentConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(schema_version) +
                                            " (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw ConfigError("scale", "must lie in (0, 1]");
  }

  const std::size_t dim = target_dimension(target);
  if (target.name == "diag-gauss") {
    if (dim == 0) throw ConfigError("target.variances", "must not be empty");
    for (std::size_t i = 0; i < dim; ++i) {
      if (!(target.variances[i] > 0.0)) {
        throw ConfigError(index("target.variances", i), "must be > 0");
      }
    }
  } else if (!target.variances.empty()) {
    throw ConfigError("target.variances", "only valid for diag-gauss");
  }
  if (initial_state && initial_state->size() != dim) {
    throw ConfigError("initial_state", "expected " + std::to_string(dim) + " coordinates");
  }

  switch (method) {
    case Method::standard:
      if (blocks.empty()) throw ConfigError("blocks", "standard runs need at least one block");
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!(blocks[i].w > 0.0)) throw ConfigError(index("blocks", i) + ".w", "must be > 0");
        if (blocks[i].updates == 0) throw ConfigError(index("blocks", i) + ".updates", "must be >= 1");
      }
      if (!schedule.empty()) throw ConfigError("schedule", "only valid for shortcut runs");
      if (eval_budget) throw ConfigError("eval_budget", "only valid for shortcut runs");
      if (cycles == 0) throw ConfigError("cycles", "must be >= 1");
      break;
    case Method::naive_adaptive:
      if (naive_updates == 0) throw ConfigError("updates", "must be >= 1");
      if (naive.window == 0) throw ConfigError("naive.window", "must be >= 1");
      if (!(naive.w_small > 0.0)) throw ConfigError("naive.w_small", "must be > 0");
      if (!(naive.w_large > 0.0)) throw ConfigError("naive.w_large", "must be > 0");
      if (!blocks.empty()) throw ConfigError("blocks", "only valid for standard runs");
      if (!schedule.empty()) throw ConfigError("schedule", "only valid for shortcut runs");
      if (eval_budget) throw ConfigError("eval_budget", "only valid for shortcut runs");
      if (cycles == 0) throw ConfigError("cycles", "must be >= 1");
      break;
    case Method::shortcut:
      if (schedule.empty()) throw ConfigError("schedule", "shortcut runs need at least one sequence");
      for (std::size_t i = 0; i < schedule.size(); ++i) {
        try {
          schedule[i].validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(index("schedule", i), e.what());
        }
      }
      if (!blocks.empty()) throw ConfigError("blocks", "only valid for standard runs");
      if ((cycles == 0) == !eval_budget.has_value()) {
        throw ConfigError("cycles", "exactly one of cycles and eval_budget must be set");
      }
      if (eval_budget && *eval_budget == 0) throw ConfigError("eval_budget", "must be >= 1");
      break;
  }

  if (estimator.max_lag == 0) throw ConfigError("estimator.max_lag", "must be >= 1");
  if (estimator.track.empty()) throw ConfigError("estimator.track", "must not be empty");
  for (std::size_t i = 0; i < estimator.track.size(); ++i) {
    if (estimator.track[i] >= dim) {
      throw ConfigError(index("estimator.track", i),
                        "coordinate out of range for dimension " + std::to_string(dim));
    }
  }
  if (output.summary.empty()) throw ConfigError("output.summary", "must not be empty");
}

std::size_t ExperimentConfig::scaled_cycles() const {
  if (cycles == 0) return 0;
  const auto n = std::llround(static_cast<double>(cycles) * scale);
  return static_cast<std::size_t>(std::max<long long>(1, n));
}

std::optional<std::uint64_t> ExperimentConfig::scaled_budget() const {
  if (!eval_budget) return std::nullopt;
  const auto n = std::llround(static_cast<double>(*eval_budget) * scale);
  return static_cast<std::uint64_t>(std::max<long long>(1, n));
}

ExperimentConfig parse_config(const json& j) {
  ObjectReader r(j, "");
  ExperimentConfig c;
  const json& version = r.require("schema_version");
  if (!version.is_number_integer()) throw ConfigError("schema_version", "expected an integer");
  c.schema_version = version.get<int>();
  if (c.schema_version != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(c.schema_version));
  }

  if (const json* v = r.find("label")) c.label = as_string(*v, "label");
  c.target = parse_target(r.require("target"), "target");
  if (const json* v = r.find("initial_state")) {
    const auto& arr = as_array(*v, "initial_state");
    StateVector x;
    for (std::size_t i = 0; i < arr.size(); ++i) x.push_back(as_double(arr[i], index("initial_state", i)));
    c.initial_state = std::move(x);
  }
  c.method = parse_method(as_string(r.require("method"), "method"), "method");
  if (const json* v = r.find("blocks")) {
    const auto& arr = as_array(*v, "blocks");
    for (std::size_t i = 0; i < arr.size(); ++i) c.blocks.push_back(parse_block(arr[i], index("blocks", i)));
  }
  if (const json* v = r.find("schedule")) {
    const auto& arr = as_array(*v, "schedule");
    for (std::size_t i = 0; i < arr.size(); ++i) c.schedule.push_back(parse_spec(arr[i], index("schedule", i)));
  }
  if (const json* v = r.find("naive")) c.naive = parse_naive(*v, "naive");
  if (const json* v = r.find("updates")) c.naive_updates = as_size(*v, "updates");
  if (const json* v = r.find("cycles")) c.cycles = as_size(*v, "cycles");
  if (const json* v = r.find("eval_budget")) c.eval_budget = as_u64(*v, "eval_budget");
  if (const json* v = r.find("seed")) c.seed = as_u64(*v, "seed");
  if (const json* v = r.find("scale")) c.scale = as_double(*v, "scale");
  if (const json* v = r.find("estimator")) c.estimator = parse_estimator(*v, "estimator");
  if (const json* v = r.find("output")) c.output = parse_output(*v, "output");
  r.finish();

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON in '") + path + "': " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["label"] = c.label;
  j["target"] = {{"name", c.target.name}};
  if (!c.target.variances.empty()) j["target"]["variances"] = c.target.variances;
  if (c.initial_state) j["initial_state"] = *c.initial_state;
  j["method"] = to_string(c.method);
  if (!c.blocks.empty()) {
    j["blocks"] = json::array();
    for (const auto& b : c.blocks) j["blocks"].push_back({{"w", b.w}, {"updates", b.updates}});
  }
  if (!c.schedule.empty()) {
    j["schedule"] = json::array();
    for (const auto& s : c.schedule) {
      j["schedule"].push_back({{"w", s.w},
                               {"L", s.group_size},
                               {"M", s.group_count},
                               {"l", s.min_rejections},
                               {"h", s.max_rejections}});
    }
  }
  if (c.method == Method::naive_adaptive) {
    j["naive"] = {{"w_small", c.naive.w_small},
                  {"w_large", c.naive.w_large},
                  {"window", c.naive.window},
                  {"threshold", c.naive.threshold}};
    j["updates"] = c.naive_updates;
  }
  if (c.cycles != 0) j["cycles"] = c.cycles;
  if (c.eval_budget) j["eval_budget"] = *c.eval_budget;
  j["seed"] = c.seed;
  j["scale"] = c.scale;
  j["estimator"] = {
      {"states", c.estimator.states == EstimatorStates::all ? "all" : "final"},
      {"max_lag", c.estimator.max_lag},
      {"variance_mode", to_string(c.estimator.variance_mode)},
      {"burn_in", c.estimator.burn_in},
      {"track", c.estimator.track}};
  j["output"] = {{"summary", c.output.summary},
                 {"trace_csv", c.output.trace_csv},
                 {"trace_mode", c.output.trace_mode == TraceMode::full ? "full" : "deduplicated"},
                 {"sequences_csv", c.output.sequences_csv},
                 {"walk_csv", c.output.walk_csv},
                 {"walk_sequences", c.output.walk_sequences}};
  return j;
}

}  // namespace shortcut
