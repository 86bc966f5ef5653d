#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "shortcut/config.hpp"
#include "shortcut/diagnostics.hpp"
#include "shortcut/targets.hpp"

namespace shortcut {

struct CoordinateReport {
  std::size_t coordinate = 0;
  DiagnosticsReport diagnostics;
  std::size_t max_lag_used = 0;
  double min = 0.0;  // over the estimator series
  double max = 0.0;
  double run_min = 0.0;  // over every state of the run
  double run_max = 0.0;
};

struct RunReport {
  ExperimentConfig config;
  std::size_t sequences = 0;
  std::size_t schedule_passes = 0;  // complete passes over blocks/schedule
  TraceStats stats;                 // over every update of the run
  std::vector<CoordinateReport> coordinates;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  [[nodiscard]] const CoordinateReport& primary() const { return coordinates.front(); }

  /// Table-column keys for the first tracked coordinate (states,
  /// rejection_rate, autocorrelation_time, estimated_mean, standard_error),
  /// then everything else. Deterministic given the config, except
  /// wall_time_seconds, which is omitted when include_wall_time is false.
  [[nodiscard]] nlohmann::json summary(bool include_wall_time = true) const;
};

[[nodiscard]] TargetPtr build_target(const TargetConfig& config);

/// Runs the configured method and, when out_dir is non-empty, writes the
/// summary JSON and any requested CSVs under it. Throws ConfigError for an
/// invalid config and std::runtime_error for I/O failures.
[[nodiscard]] RunReport run_experiment(const ExperimentConfig& config,
                                       const std::string& out_dir = "");

}  // namespace shortcut
