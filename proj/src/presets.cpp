#include "shortcut/presets.hpp"

#include <cstdio>
#include <filesystem>
#include <future>
#include <sstream>
#include <stdexcept>

#include "shortcut/trace_io.hpp"

namespace shortcut {

namespace {

using nlohmann::json;

ExperimentConfig base(const std::string& table, const std::string& method_label) {
  ExperimentConfig c;
  c.label = table + "-" + method_label;
  c.target.name = table;
  c.output.summary = c.label + ".summary.json";
  c.output.sequences_csv = c.label + ".sequences.csv";
  return c;
}

ExperimentConfig standard(const std::string& table, const std::string& label,
                          std::vector<StandardBlock> blocks, std::size_t cycles) {
  ExperimentConfig c = base(table, label);
  c.method = Method::standard;
  c.blocks = std::move(blocks);
  c.cycles = cycles;
  return c;
}

ExperimentConfig shortcut_method(const std::string& table, const std::string& label,
                                 std::vector<SequenceSpec> schedule, std::uint64_t budget) {
  ExperimentConfig c = base(table, label);
  c.method = Method::shortcut;
  c.schedule = std::move(schedule);
  c.eval_budget = budget;
  return c;
}

// Mixture comparison: 1.2 million updates per method; mean and SE use the known
// variance 75.5.
Preset mixture1d_preset() {
  const std::string t = "mixture1d";
  Preset p{t, "bimodal 1-D mixture: fixed, naively adaptive and short-cut stepsizes", {}};
  p.methods.push_back(standard(t, "standard-w2", {{2.0, 1000}}, 1200));
  p.methods.push_back(standard(t, "standard-w20", {{20.0, 1000}}, 1200));

  ExperimentConfig naive = base(t, "naive-adaptive");
  naive.method = Method::naive_adaptive;
  naive.naive_updates = 1000;
  naive.cycles = 1200;
  p.methods.push_back(naive);

  auto l0 = shortcut_method(t, "shortcut-l0", {{2.0, 5, 6, 0, 4}, {20.0, 5, 18, 0, 4}}, 1200000);
  auto l1 = shortcut_method(t, "shortcut-l1", {{2.0, 5, 12, 1, 4}, {20.0, 5, 12, 1, 4}}, 1200000);
  l0.output.walk_csv = l0.label + ".walk.csv";
  l1.output.walk_csv = l1.label + ".walk.csv";
  p.methods.push_back(l0);
  p.methods.push_back(l1);

  for (auto& m : p.methods) {
    m.estimator.max_lag = 500;
    m.estimator.variance_mode = VarianceMode::known;
  }
  return p;
}

// Seven-dimensional Gaussian: 900000 evaluations per method, first coordinate tracked.
// Groups hold 10 updates, which divides every sequence length (60, 150,
// 390, 200).
Preset mvgauss7_preset() {
  const std::string t = "mvgauss7";
  Preset p{t, "7-D Gaussian with two wide and five narrow coordinates", {}};
  p.methods.push_back(standard(t, "standard-w0.02", {{0.02, 1000}}, 900));
  p.methods.push_back(standard(t, "standard-w0.1", {{0.1, 1000}}, 900));
  p.methods.push_back(standard(t, "standard-w0.5", {{0.5, 1000}}, 900));
  p.methods.push_back(
      standard(t, "standard-three-w", {{0.02, 200}, {0.1, 200}, {0.5, 200}}, 1500));
  p.methods.push_back(shortcut_method(
      t, "shortcut-v1", {{0.02, 10, 6, 0, 10}, {0.1, 10, 15, 0, 9}, {0.5, 10, 39, 0, 9}}, 900000));
  p.methods.push_back(shortcut_method(
      t, "shortcut-v2", {{0.02, 10, 20, 1, 10}, {0.1, 10, 20, 1, 9}, {0.5, 10, 20, 0, 9}}, 900000));
  p.methods.push_back(shortcut_method(
      t, "shortcut-v3", {{0.02, 10, 20, 2, 10}, {0.1, 10, 20, 2, 9}, {0.5, 10, 20, 0, 9}}, 900000));

  const std::size_t lags[] = {12000, 8000, 12000, 8000, 8000, 8000, 8000};
  for (std::size_t i = 0; i < p.methods.size(); ++i) {
    p.methods[i].estimator.max_lag = lags[i];
    p.methods[i].estimator.variance_mode = VarianceMode::sample;
  }
  return p;
}

// Funnel: sequences of 1000 updates from v = 0, x_i = 1; only the final
// state of each sequence enters the estimates. 20 million evaluations per
// method. The smallest stepsize never reverses on all rejections and the
// largest never on too few, as for the mvgauss7 schedules.
Preset funnel_preset() {
  const std::string t = "funnel";
  Preset p{t, "10-D funnel: v ~ N(0, 9), x_i | v ~ N(0, e^v)", {}};
  p.methods.push_back(standard(t, "standard-w0.03", {{0.03, 1000}}, 20000));
  p.methods.push_back(standard(t, "standard-w0.15", {{0.15, 1000}}, 20000));
  p.methods.push_back(standard(t, "standard-w0.75", {{0.75, 1000}}, 20000));
  p.methods.push_back(standard(t, "standard-w3.75", {{3.75, 1000}}, 20000));
  p.methods.push_back(standard(t, "standard-four-w",
                               {{0.03, 1000}, {0.15, 1000}, {0.75, 1000}, {3.75, 1000}}, 5000));
  p.methods.push_back(shortcut_method(t, "shortcut-four-w",
                                      {{0.03, 40, 25, 3, 40},
                                       {0.15, 40, 25, 3, 39},
                                       {0.75, 40, 25, 3, 39},
                                       {3.75, 40, 25, 0, 39}},
                                      20000000));

  const std::size_t lags[] = {1000, 100, 1000, 1000, 50, 50};
  StateVector x0(10, 1.0);
  x0[0] = 0.0;
  for (std::size_t i = 0; i < p.methods.size(); ++i) {
    auto& m = p.methods[i];
    m.initial_state = x0;
    m.estimator.states = EstimatorStates::final_only;
    m.estimator.max_lag = lags[i];
    m.estimator.variance_mode = VarianceMode::sample;
  }
  return p;
}

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> presets = {mixture1d_preset(), mvgauss7_preset(),
                                              funnel_preset()};
  return presets;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : all_presets()) names.push_back(p.name);
  for (const auto& p : all_presets()) {
    for (const auto& m : p.methods) names.push_back(m.label);
  }
  return names;
}

Preset table_preset(const std::string& name) {
  for (const auto& p : all_presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<ExperimentConfig> preset_configs(const std::string& name, double scale,
                                             std::uint64_t base_seed) {
  std::vector<ExperimentConfig> out;
  for (const auto& p : all_presets()) {
    for (std::size_t i = 0; i < p.methods.size(); ++i) {
      if (p.name != name && p.methods[i].label != name) continue;
      ExperimentConfig c = p.methods[i];
      c.seed = base_seed + i;
      c.scale = scale;
      c.validate();
      out.push_back(std::move(c));
    }
  }
  if (out.empty()) throw std::invalid_argument("unknown preset '" + name + "'");
  return out;
}

json Reproduction::comparison() const {
  json rows = json::array();
  for (const auto& r : reports) {
    const auto& d = r.primary().diagnostics;
    rows.push_back({{"method", r.config.label},
                    {"states", d.states_used},
                    {"rejection_rate", r.stats.rejection_rate()},
                    {"autocorrelation_time", d.tau},
                    {"estimated_mean", d.mean},
                    {"standard_error", d.standard_error},
                    {"evaluations", r.stats.evaluations},
                    {"seed", r.config.seed}});
  }
  return {{"preset", preset}, {"rows", rows}};
}

json Reproduction::copy_fractions() const {
  json rows = json::array();
  for (const auto& r : reports) {
    if (r.config.method != Method::shortcut) continue;
    for (const auto& spec : r.config.schedule) {
      const auto it = r.stats.by_stepsize.find(spec.w);
      rows.push_back({{"method", r.config.label},
                      {"w", spec.w},
                      {"K", spec.length()},
                      {"copy_fraction", it == r.stats.by_stepsize.end() ? 0.0 : it->second.copy_fraction()}});
    }
  }
  return {{"preset", preset}, {"rows", rows}};
}

std::string Reproduction::table_text() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %9s %9s %10s %10s %8s\n", "method", "states",
                "rej.rate", "tau", "mean", "SE");
  out << line;
  const json table = comparison()["rows"];
  for (const auto& row : table) {
    std::snprintf(line, sizeof line, "%-28s %9zu %9s %10s %10s %8s\n",
                  row["method"].get<std::string>().c_str(), row["states"].get<std::size_t>(),
                  fixed(row["rejection_rate"].get<double>(), 3).c_str(),
                  fixed(row["autocorrelation_time"].get<double>(), 1).c_str(),
                  fixed(row["estimated_mean"].get<double>(), 3).c_str(),
                  fixed(row["standard_error"].get<double>(), 3).c_str());
    out << line;
  }
  const json cf = copy_fractions()["rows"];
  if (!cf.empty()) {
    out << "\ncopy fractions\n";
    for (const auto& row : cf) {
      std::snprintf(line, sizeof line, "%-28s w=%-8g K=%-5zu %s\n",
                    row["method"].get<std::string>().c_str(), row["w"].get<double>(), row["K"].get<std::size_t>(),
                    fixed(row["copy_fraction"].get<double>(), 3).c_str());
      out << line;
    }
  }
  return out.str();
}

Reproduction reproduce(const std::string& name, double scale, std::uint64_t base_seed,
                       const std::string& out_dir) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError("scale", "must lie in (0, 1]");
  const std::vector<ExperimentConfig> configs = preset_configs(name, scale, base_seed);
  const std::string dir =
      out_dir.empty() ? std::string() : (std::filesystem::path(out_dir) / name).string();

  // One chain per thread; each method owns its stream and output files.
  std::vector<std::future<RunReport>> futures;
  for (const auto& c : configs) {
    futures.push_back(std::async(std::launch::async, [&c, &dir] { return run_experiment(c, dir); }));
  }
  Reproduction out;
  out.preset = name;
  for (auto& f : futures) out.reports.push_back(f.get());

  if (!dir.empty()) {
    const auto path = [&](const char* file) { return (std::filesystem::path(dir) / file).string(); };
    write_file_atomic(path("comparison.json"), out.comparison().dump(2) + "\n");
    write_file_atomic(path("copy_fractions.json"), out.copy_fractions().dump(2) + "\n");
    write_file_atomic(path("table.txt"), out.table_text());

    std::ostringstream csv;
    csv << "method,states,rejection_rate,autocorrelation_time,estimated_mean,standard_error,"
           "evaluations,seed\n";
    const json rows = out.comparison()["rows"];
    for (const auto& row : rows) {
      csv << row["method"].get<std::string>() << ',' << row["states"].get<std::size_t>() << ','
          << format_double(row["rejection_rate"].get<double>()) << ','
          << format_double(row["autocorrelation_time"].get<double>()) << ','
          << format_double(row["estimated_mean"].get<double>()) << ','
          << format_double(row["standard_error"].get<double>()) << ','
          << row["evaluations"].get<std::uint64_t>() << ',' << row["seed"].get<std::uint64_t>()
          << '\n';
    }
    write_file_atomic(path("comparison.csv"), csv.str());

    std::ostringstream cf;
    cf << "method,w,K,copy_fraction\n";
    const json cf_rows = out.copy_fractions()["rows"];
    for (const auto& row : cf_rows) {
      cf << row["method"].get<std::string>() << ',' << format_double(row["w"].get<double>()) << ','
         << row["K"].get<std::size_t>() << ',' << format_double(row["copy_fraction"].get<double>())
         << '\n';
    }
    write_file_atomic(path("copy_fractions.csv"), cf.str());
  }
  return out;
}

}  // namespace shortcut
