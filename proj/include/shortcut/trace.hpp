#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "shortcut/targets.hpp"

namespace shortcut {

enum class Provenance : std::uint8_t { computed, copied };

/// One state of a run: the initial state (row 0) or the state after one
/// Metropolis update. Copied rows name the earlier row they duplicate in
/// `source`; that row has a bit-identical state and the same rejected flag.
struct TraceRecord {
  StateVector state;
  double log_density = 0.0;
  double w = 0.0;
  bool rejected = false;
  Provenance provenance = Provenance::computed;
  std::size_t source = 0;
  std::size_t group = 0;
  std::size_t sequence = 0;
  std::size_t step = 0;  // 1..K within the sequence; 0 for the initial row
};

struct SequenceSummary {
  std::size_t sequence = 0;
  double w = 0.0;
  std::size_t updates = 0;
  std::size_t rejected = 0;
  std::size_t copied = 0;
  std::size_t reversals = 0;
  std::uint64_t evaluations = 0;
  StateVector initial_state;
  StateVector final_state;
  /// States at group boundaries (M+1 of them); empty for standard blocks.
  std::vector<StateVector> group_ends;
};

/// Receives rows in order as runners produce them. Sequence summaries arrive
/// after the rows of that sequence.
class TraceObserver {
 public:
  virtual ~TraceObserver() = default;
  virtual void on_record(const TraceRecord& record) = 0;
  virtual void on_sequence_end(const SequenceSummary&) {}
};

/// A fully materialized run. `evaluations` counts every density evaluation,
/// including the one for the initial state, and equals the number of
/// computed rows.
struct Trace {
  std::vector<TraceRecord> records;
  std::vector<SequenceSummary> sequences;
  std::uint64_t evaluations = 0;
};

class TraceCollector final : public TraceObserver {
 public:
  void on_record(const TraceRecord& record) override;
  void on_sequence_end(const SequenceSummary& summary) override;

  [[nodiscard]] const Trace& trace() const { return trace_; }
  [[nodiscard]] Trace take() { return std::move(trace_); }

 private:
  Trace trace_;
};

/// Chain position carried between runner calls, so that blocks of different
/// methods and stepsizes can be concatenated into one run.
struct ChainCursor {
  StateVector state;
  double log_density = 0.0;
  /// A row holding `state` whose rejected flag is false (or row 0).
  std::size_t origin_row = 0;
  std::size_t next_row = 1;
  std::size_t next_sequence = 0;
  std::uint64_t evaluations = 1;

  /// Evaluates the initial state and emits row 0. Throws
  /// std::invalid_argument when x0 has zero density or the wrong length.
  static ChainCursor start(const Target& target, StateVector x0,
                           TraceObserver& observer);
};

}  // namespace shortcut
