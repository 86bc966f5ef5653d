#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shortcut/config.hpp"
#include "shortcut/experiment.hpp"
#include "shortcut/presets.hpp"

namespace {

int fail(const std::string& kind, const std::string& message, const std::string& field = "") {
  nlohmann::json err = {{"error", kind}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << err.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-cut Metropolis sampler and experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string run_out_dir = ".";
  auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out-dir", run_out_dir, "Directory for summary and CSV outputs");

  std::string preset;
  double scale = shortcut::kDefaultPresetScale;
  std::uint64_t seed = shortcut::kDefaultPresetSeed;
  std::string reproduce_out_dir = "results";
  auto* reproduce = app.add_subcommand("reproduce", "Run a table preset or one of its methods");
  reproduce->add_option("--preset", preset, "Preset name (see list-presets)")->required();
  reproduce->add_option("--scale", scale, "Fraction of the full run length, in (0, 1]");
  reproduce->add_option("--seed", seed, "Base seed; method i uses seed + i");
  reproduce->add_option("--out-dir", reproduce_out_dir, "Output root; files go to <out-dir>/<preset>");

  auto* list = app.add_subcommand("list-presets", "List preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
    return 2;
  }

  try {
    if (*run) {
      const auto config = shortcut::load_config(config_path);
      const auto report = shortcut::run_experiment(config, run_out_dir);
      std::cout << report.summary().dump(2) << '\n';
    } else if (*reproduce) {
      const auto result = shortcut::reproduce(preset, scale, seed, reproduce_out_dir);
      std::cout << result.table_text();
    } else if (*list) {
      for (const auto& name : shortcut::preset_names()) std::cout << name << '\n';
    }
  } catch (const shortcut::ConfigError& e) {
    return fail("config", e.what(), e.field());
  } catch (const std::exception& e) {
    return fail("runtime", e.what());
  }
  return 0;
}
