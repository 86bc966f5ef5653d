#include "shortcut/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "shortcut/engine.hpp"
#include "shortcut/metropolis.hpp"
#include "shortcut/rng.hpp"
#include "shortcut/trace_io.hpp"

namespace shortcut {

namespace {

using nlohmann::json;

class Fanout final : public TraceObserver {
 public:
  void add(TraceObserver* o) { observers_.push_back(o); }
  void on_record(const TraceRecord& r) override {
    for (auto* o : observers_) o->on_record(r);
  }
  void on_sequence_end(const SequenceSummary& s) override {
    for (auto* o : observers_) o->on_sequence_end(s);
  }

 private:
  std::vector<TraceObserver*> observers_;
};

/// Collects the estimator series for the tracked coordinates.
class SeriesRecorder final : public TraceObserver {
 public:
  SeriesRecorder(const EstimatorConfig& est)
      : est_(est),
        series_(est.track.size()),
        lo_(est.track.size(), std::numeric_limits<double>::infinity()),
        hi_(est.track.size(), -std::numeric_limits<double>::infinity()) {}

  void on_record(const TraceRecord& r) override {
    for (std::size_t i = 0; i < est_.track.size(); ++i) {
      lo_[i] = std::min(lo_[i], r.state[est_.track[i]]);
      hi_[i] = std::max(hi_[i], r.state[est_.track[i]]);
    }
    if (est_.states != EstimatorStates::all) return;
    if (rows_++ < est_.burn_in) return;
    for (std::size_t i = 0; i < est_.track.size(); ++i) series_[i].push_back(r.state[est_.track[i]]);
  }

  void on_sequence_end(const SequenceSummary& s) override {
    ++sequences_;
    if (est_.states != EstimatorStates::final_only) return;
    if (sequences_ <= est_.burn_in) return;
    for (std::size_t i = 0; i < est_.track.size(); ++i) {
      series_[i].push_back(s.final_state[est_.track[i]]);
    }
  }

  [[nodiscard]] const std::vector<std::vector<double>>& series() const { return series_; }
  [[nodiscard]] std::size_t sequences() const { return sequences_; }
  [[nodiscard]] double run_min(std::size_t i) const { return lo_[i]; }
  [[nodiscard]] double run_max(std::size_t i) const { return hi_[i]; }

 private:
  const EstimatorConfig& est_;
  std::vector<std::vector<double>> series_;
  std::vector<double> lo_, hi_;
  std::size_t rows_ = 0;
  std::size_t sequences_ = 0;
};

/// One line per sequence: where it started and ended, and what it cost.
class SequenceCsv final : public TraceObserver {
 public:
  SequenceCsv(const std::string& path, std::size_t coordinate)
      : file_(path), coordinate_(coordinate) {
    file_.stream() << "seq,w,updates,evaluations,rejected,copied,reversals,"
                      "copy_fraction,x_start,x_end\n";
  }
  void on_record(const TraceRecord&) override {}
  void on_sequence_end(const SequenceSummary& s) override {
    const double copy_fraction =
        s.updates ? static_cast<double>(s.copied) / static_cast<double>(s.updates) : 0.0;
    file_.stream() << s.sequence << ',' << format_double(s.w) << ',' << s.updates << ','
                   << s.evaluations << ',' << s.rejected << ',' << s.copied << ','
                   << s.reversals << ',' << format_double(copy_fraction) << ','
                   << format_double(s.initial_state[coordinate_]) << ','
                   << format_double(s.final_state[coordinate_]) << '\n';
  }
  void finish() { file_.commit(); }

 private:
  AtomicOutput file_;
  std::size_t coordinate_;
};

/// Rows of the first few sequences with provenance, and the state at each
/// group boundary on the row that closes the group.
class WalkCsv final : public TraceObserver {
 public:
  WalkCsv(const std::string& path, std::size_t coordinate, std::size_t sequences)
      : file_(path), coordinate_(coordinate), limit_(sequences) {
    file_.stream() << "row,seq,group,step,provenance,src,rejected,x,group_end\n";
  }

  void on_record(const TraceRecord& r) override {
    const std::size_t row = rows_++;
    if (row == 0 || r.sequence >= limit_) return;
    pending_.push_back({row, r});
  }

  void on_sequence_end(const SequenceSummary& s) override {
    if (s.sequence >= limit_) return;
    auto& out = file_.stream();
    const std::size_t groups = s.group_ends.empty() ? 0 : s.group_ends.size() - 1;
    const std::size_t L = groups ? s.updates / groups : 0;
    if (!pending_.empty()) out << pending_.front().first - 1;
    out << ',' << s.sequence << ",0,0,C,,0," << format_double(s.initial_state[coordinate_]) << ','
        << (groups ? format_double(s.group_ends[0][coordinate_]) : "") << '\n';
    for (const auto& [row, r] : pending_) {
      out << row << ',' << r.sequence << ',' << r.group << ',' << r.step << ','
          << (r.provenance == Provenance::computed ? 'C' : 'P') << ',';
      if (r.provenance == Provenance::copied) out << r.source;
      out << ',' << (r.rejected ? 1 : 0) << ',' << format_double(r.state[coordinate_]) << ',';
      if (L && r.step % L == 0) out << format_double(s.group_ends[r.step / L][coordinate_]);
      out << '\n';
    }
    pending_.clear();
  }

  void finish() { file_.commit(); }

 private:
  AtomicOutput file_;
  std::size_t coordinate_;
  std::size_t limit_;
  std::size_t rows_ = 0;
  std::vector<std::pair<std::size_t, TraceRecord>> pending_;
};

std::string output_path(const std::string& out_dir, const std::string& name) {
  return (std::filesystem::path(out_dir) / name).string();
}

json diagnostics_json(const CoordinateReport& c) {
  const auto& d = c.diagnostics;
  return {{"coordinate", c.coordinate},
          {"states", d.states_used},
          {"autocorrelation_time", d.tau},
          {"effective_sample_size", d.ess},
          {"estimated_mean", d.mean},
          {"variance", d.variance},
          {"variance_mode", to_string(d.variance_mode)},
          {"standard_error", d.standard_error},
          {"max_lag", c.max_lag_used},
          {"min", c.min},
          {"max", c.max},
          {"run_min", c.run_min},
          {"run_max", c.run_max},
          {"degenerate", d.degenerate}};
}

}  // namespace

TargetPtr build_target(const TargetConfig& config) {
  if (config.name == "diag-gauss") return make_diagonal_gaussian(config.variances);
  return make_target(config.name);
}

json RunReport::summary(bool include_wall_time) const {
  json j;
  j["label"] = config.label;
  j["method"] = to_string(config.method);
  j["target"] = config.target.name;
  const auto& p = primary();
  j["states"] = p.diagnostics.states_used;
  j["rejection_rate"] = stats.rejection_rate();
  j["autocorrelation_time"] = p.diagnostics.tau;
  j["estimated_mean"] = p.diagnostics.mean;
  j["standard_error"] = p.diagnostics.standard_error;

  j["updates"] = stats.updates;
  j["evaluations"] = stats.evaluations;
  j["copied"] = stats.copied;
  j["copy_fraction"] = stats.copy_fraction();
  j["sequences"] = sequences;
  j["schedule_passes"] = schedule_passes;
  j["seed"] = config.seed;
  j["scale"] = config.scale;
  j["variance_mode"] = to_string(config.estimator.variance_mode);
  j["by_stepsize"] = json::array();
  for (const auto& [w, s] : stats.by_stepsize) {
    j["by_stepsize"].push_back({{"w", w},
                                {"updates", s.updates},
                                {"rejection_rate", s.rejection_rate()},
                                {"copy_fraction", s.copy_fraction()},
                                {"evaluations", s.evaluations}});
  }
  j["coordinates"] = json::array();
  for (const auto& c : coordinates) j["coordinates"].push_back(diagnostics_json(c));
  j["warnings"] = warnings;
  j["config"] = to_json(config);
  if (include_wall_time) j["wall_time_seconds"] = wall_seconds;
  return j;
}

RunReport run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  const TargetPtr target = build_target(config.target);
  const std::size_t dim = target->dimension();
  RunReport report;
  report.config = config;

  std::optional<KnownMoments> moments = target->known_moments();
  if (config.estimator.variance_mode == VarianceMode::known && !moments) {
    throw ConfigError("estimator.variance_mode", "target '" + target->name() +
                                                     "' has no known variance");
  }

  Fanout fan;
  TraceStatsAccumulator stats;
  SeriesRecorder series(config.estimator);
  fan.add(&stats);
  fan.add(&series);

  const bool writing = !out_dir.empty();
  const std::size_t coordinate = config.estimator.track.front();
  std::unique_ptr<SequenceCsv> sequences_csv;
  std::unique_ptr<WalkCsv> walk_csv;
  std::unique_ptr<TraceCsvWriter> trace_writer;
  std::unique_ptr<TraceCollector> trace_collector;
  if (writing && !config.output.sequences_csv.empty()) {
    sequences_csv = std::make_unique<SequenceCsv>(output_path(out_dir, config.output.sequences_csv), coordinate);
    fan.add(sequences_csv.get());
  }
  if (writing && !config.output.walk_csv.empty()) {
    walk_csv = std::make_unique<WalkCsv>(output_path(out_dir, config.output.walk_csv), coordinate,
                                         config.output.walk_sequences);
    fan.add(walk_csv.get());
  }
  if (writing && !config.output.trace_csv.empty()) {
    if (config.output.trace_mode == TraceMode::full) {
      trace_writer = std::make_unique<TraceCsvWriter>(output_path(out_dir, config.output.trace_csv), dim);
      fan.add(trace_writer.get());
    } else {
      trace_collector = std::make_unique<TraceCollector>();
      fan.add(trace_collector.get());
    }
  }

  RandomStream stream(config.seed);
  ChainCursor cursor = ChainCursor::start(
      *target, config.initial_state.value_or(StateVector(dim, 0.0)), fan);

  switch (config.method) {
    case Method::standard:
      for (std::size_t c = 0; c < config.scaled_cycles(); ++c) {
        for (const auto& b : config.blocks) {
          advance_standard(*target, cursor, b.w, b.updates, stream, fan);
        }
        ++report.schedule_passes;
      }
      break;
    case Method::naive_adaptive: {
      NaiveAdaptiveState state(config.naive);
      for (std::size_t c = 0; c < config.scaled_cycles(); ++c) {
        advance_naive_adaptive(*target, cursor, state, config.naive_updates, stream, fan);
        ++report.schedule_passes;
      }
      report.warnings.push_back("naive-adaptive: the first " + std::to_string(config.naive.window) +
                                " updates use w_large until the rejection window is full");
      break;
    }
    case Method::shortcut:
      if (const auto budget = config.scaled_budget()) {
        // Update evaluations exclude the initial state's.
        auto spent = [&] { return cursor.evaluations - 1; };
        while (spent() < *budget) {
          for (const auto& spec : config.schedule) {
            advance_shortcut(*target, cursor, spec, stream, fan);
            if (spent() >= *budget) break;
          }
        }
        report.schedule_passes = cursor.next_sequence / config.schedule.size();
      } else {
        for (std::size_t c = 0; c < config.scaled_cycles(); ++c) {
          for (const auto& spec : config.schedule) {
            advance_shortcut(*target, cursor, spec, stream, fan);
          }
          ++report.schedule_passes;
        }
      }
      break;
  }

  report.stats = stats.stats();
  report.sequences = series.sequences();
  if (report.stats.evaluations != cursor.evaluations) {
    throw std::logic_error("evaluation counters disagree");
  }

  if (config.estimator.variance_mode == VarianceMode::known) {
    report.warnings.push_back("standard errors use the target's known variance");
  } else {
    report.warnings.push_back("standard errors use the sample variance of the estimator series");
  }
  if (config.estimator.states == EstimatorStates::final_only) {
    report.warnings.push_back("estimates use only the final state of each sequence");
  }

  for (std::size_t i = 0; i < config.estimator.track.size(); ++i) {
    const auto& s = series.series()[i];
    if (s.size() < 2) {
      throw std::runtime_error("run produced " + std::to_string(s.size()) +
                               " estimator states; at least 2 are needed");
    }
    CoordinateReport c;
    c.coordinate = config.estimator.track[i];
    c.max_lag_used = std::min(config.estimator.max_lag, s.size() - 1);
    if (c.max_lag_used < config.estimator.max_lag) {
      report.warnings.push_back("coordinate " + std::to_string(c.coordinate) + ": max_lag reduced to " +
                                std::to_string(c.max_lag_used) + " for a series of " +
                                std::to_string(s.size()) + " states");
    }
    const double known_var = moments ? moments->variance[c.coordinate] : 0.0;
    c.diagnostics = diagnose(s, c.max_lag_used, config.estimator.variance_mode, known_var);
    c.diagnostics.rejection_rate = report.stats.rejection_rate();
    c.diagnostics.copy_fraction = report.stats.copy_fraction();
    c.diagnostics.evaluations = report.stats.evaluations;
    if (c.diagnostics.degenerate) {
      report.warnings.push_back("coordinate " + std::to_string(c.coordinate) +
                                ": constant series, autocorrelations set to 0");
    }
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    c.min = *lo;
    c.max = *hi;
    c.run_min = series.run_min(i);
    c.run_max = series.run_max(i);
    report.coordinates.push_back(c);
  }

  if (sequences_csv) sequences_csv->finish();
  if (walk_csv) walk_csv->finish();
  if (trace_writer) trace_writer->finish();
  if (trace_collector) {
    emit_trace(trace_collector->trace(), output_path(out_dir, config.output.trace_csv),
               config.output.trace_mode);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (writing) {
    write_file_atomic(output_path(out_dir, config.output.summary), report.summary().dump(2) + "\n");
  }
  return report;
}

}  // namespace shortcut
