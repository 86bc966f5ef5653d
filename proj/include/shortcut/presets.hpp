#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shortcut/config.hpp"
#include "shortcut/experiment.hpp"

namespace shortcut {

inline constexpr std::uint64_t kDefaultPresetSeed = 20010;
inline constexpr double kDefaultPresetScale = 0.1;

/// A table preset: its methods in table row order. Method i runs with seed
/// base + i, so a single-method preset reproduces its table row exactly.
struct Preset {
  std::string name;
  std::string description;
  std::vector<ExperimentConfig> methods;  // full size, seed offsets 0, 1, ...
};

/// "mixture1d", "mvgauss7", "funnel", then every "<table>-<method>".
[[nodiscard]] std::vector<std::string> preset_names();

/// Table presets only; throws std::invalid_argument for unknown names.
[[nodiscard]] Preset table_preset(const std::string& name);

/// Resolves a table or single-method preset to the configs to run, with
/// seeds and scale applied. Throws std::invalid_argument for unknown names.
[[nodiscard]] std::vector<ExperimentConfig> preset_configs(const std::string& name, double scale,
                                                           std::uint64_t base_seed);

struct Reproduction {
  std::string preset;
  std::vector<RunReport> reports;  // in table row order

  /// Rows in table column order: states, rejection rate, tau, mean, SE.
  [[nodiscard]] nlohmann::json comparison() const;
  /// Copy fraction for each stepsize of each short-cut method.
  [[nodiscard]] nlohmann::json copy_fractions() const;
  [[nodiscard]] std::string table_text() const;
};

/// Runs every method of the preset (in parallel threads when there are
/// several) and, when out_dir is non-empty, writes per-method summaries and
/// plot data plus comparison.{json,csv} and copy_fractions.csv under
/// out_dir/<preset>.
[[nodiscard]] Reproduction reproduce(const std::string& name, double scale = kDefaultPresetScale,
                                     std::uint64_t base_seed = kDefaultPresetSeed,
                                     const std::string& out_dir = "");

}  // namespace shortcut
