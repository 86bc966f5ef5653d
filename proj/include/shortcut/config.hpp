#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shortcut/diagnostics.hpp"
#include "shortcut/engine.hpp"
#include "shortcut/metropolis.hpp"
#include "shortcut/targets.hpp"

namespace shortcut {

inline constexpr int kConfigSchemaVersion = 1;

/// A malformed configuration. `field` is a JSON-pointer-like path such as
/// "schedule[1].h".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Method { standard, naive_adaptive, shortcut };
enum class EstimatorStates { all, final_only };
enum class TraceMode { full, deduplicated };

struct TargetConfig {
  std::string name = "mixture1d";
  std::vector<double> variances;  // diag-gauss only
};

/// Standard updates with one stepsize, emitted as one sequence.
struct StandardBlock {
  double w = 1.0;
  std::size_t updates = 0;
};

struct EstimatorConfig {
  EstimatorStates states = EstimatorStates::all;
  std::size_t max_lag = 500;
  VarianceMode variance_mode = VarianceMode::sample;
  std::size_t burn_in = 0;  // states (all mode) or sequences (final mode)
  std::vector<std::size_t> track{0};
};

/// Paths are relative to the run's output directory. Empty means "not
/// written", except for the summary.
struct OutputConfig {
  std::string summary = "summary.json";
  std::string trace_csv;
  TraceMode trace_mode = TraceMode::full;
  std::string sequences_csv;
  std::string walk_csv;
  std::size_t walk_sequences = 4;
};

/// A complete, declarative run. Cycle counts and budgets are given at full
/// size; `scale` shrinks them to whole numbers of cycles.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string label;
  TargetConfig target;
  std::optional<StateVector> initial_state;  // zeros when absent
  Method method = Method::standard;

  std::vector<StandardBlock> blocks;  // standard: one cycle
  std::vector<SequenceSpec> schedule;  // shortcut: one cycle
  NaiveAdaptiveSettings naive;
  std::size_t naive_updates = 0;  // naive-adaptive: updates per sequence

  /// Cycles of blocks/schedule (naive: sequences). For shortcut runs exactly
  /// one of cycles and eval_budget is set; with a budget the run stops at the
  /// first sequence boundary where update evaluations reach it.
  std::size_t cycles = 0;
  std::optional<std::uint64_t> eval_budget;

  std::uint64_t seed = 1;
  double scale = 1.0;
  EstimatorConfig estimator;
  OutputConfig output;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  [[nodiscard]] std::size_t scaled_cycles() const;
  [[nodiscard]] std::optional<std::uint64_t> scaled_budget() const;
};

[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& j);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

[[nodiscard]] std::string to_string(Method method);
[[nodiscard]] std::string to_string(VarianceMode mode);

}  // namespace shortcut
