#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "shortcut/metropolis.hpp"
#include "shortcut/rng.hpp"
#include "shortcut/targets.hpp"
#include "shortcut/trace.hpp"

namespace shortcut {

/// Tuning of one short-cut sequence of K = M*L updates. A group of L updates
/// whose rejection count falls outside [l, h] triggers a reversal.
/// (l = 0, h = L) never reverses and is exactly standard Metropolis.
struct SequenceSpec {
  double w = 1.0;
  std::size_t group_size = 1;      // L
  std::size_t group_count = 1;     // M
  std::size_t min_rejections = 0;  // l
  std::size_t max_rejections = 0;  // h

  [[nodiscard]] std::size_t length() const { return group_size * group_count; }
  [[nodiscard]] bool out_of_range(std::size_t rejections) const {
    return rejections < min_rejections || rejections > max_rejections;
  }
  /// Throws std::invalid_argument unless w > 0, L >= 1, M >= 1 and
  /// 0 <= l <= h <= L.
  void validate() const;

  static SequenceSpec no_reversals(double w, std::size_t group_size,
                                   std::size_t group_count);
};

struct ReversalEvent {
  std::size_t group = 0;
  int direction_before = +1;
  int direction_after = -1;
};

/// Result of one short-cut sequence. `records` holds K+1 rows: the initial
/// state, then the state after each of the K updates, with `source` indices
/// local to this sequence (0 is the initial state). `group_ends` holds the
/// M+1 states at group boundaries; a group that triggered a reversal ends at
/// its start state. The sequence's result is group_ends.back().
struct SequenceTrace {
  std::vector<TraceRecord> records;
  std::vector<StateVector> group_ends;
  std::vector<ReversalEvent> reversals;
  /// Density evaluations performed by the updates; the initial state's
  /// log density is supplied, not evaluated. Equals the number of computed
  /// rows among records[1..K].
  std::uint64_t evaluations = 0;
  double final_log_density = 0.0;
  /// Local row whose state is the final state and whose rejected flag is
  /// false, or 0 when the final state is the initial state.
  std::size_t final_origin = 0;
  /// Auxiliaries drawn for each slot 0..K-1, as first used. Slots never
  /// visited stay empty.
  std::vector<std::optional<AuxiliaryPair>> consumed;

  [[nodiscard]] const StateVector& final_state() const { return group_ends.back(); }
  [[nodiscard]] std::size_t copied() const;
};

/// Short-cut Metropolis. The index starts at 0 with direction +1; auxiliaries
/// are drawn lazily in first-use order, and steps whose outcome is already
/// known are emitted as copies without evaluating the density. Once two
/// fresh groups have triggered reversals, every remaining update is a copy.
///
/// x0 is snapped to the proposal lattice.
[[nodiscard]] SequenceTrace shortcut_sequence(const Target& target,
                                              StateVector x0,
                                              const SequenceSpec& spec,
                                              RandomStream& stream);
[[nodiscard]] SequenceTrace shortcut_sequence(const Target& target,
                                              StateVector x0,
                                              double log_density_x0,
                                              const SequenceSpec& spec,
                                              RandomStream& stream);

/// The short-cut procedure executed literally: materialized auxiliaries for
/// all K slots, an index i and direction s, and a t_met_apply call for every
/// one of the K updates, including those the optimized engine copies. On a
/// reversal the group's state, index and auxiliaries are restored. Slots
/// that the walk never visits may hold any value. Every row is computed, so
/// `evaluations` is K. Used as the ground-truth oracle for shortcut_sequence.
[[nodiscard]] SequenceTrace reference_sequence(
    const Target& target, StateVector x0, const SequenceSpec& spec,
    const std::vector<AuxiliaryPair>& auxiliaries);

/// Fills unvisited slots of a consumed-auxiliary list with placeholders so
/// that it can drive reference_sequence.
[[nodiscard]] std::vector<AuxiliaryPair> materialize_auxiliaries(
    const SequenceTrace& trace, std::size_t dimension);

struct ReplayResult {
  StateVector final_state;
  double final_log_density = 0.0;
  std::uint64_t evaluations = 0;
};

/// Same final state as shortcut_sequence for the same stream position, while
/// keeping only the initial and the current state. When the walk ends on a
/// state that was not kept, it is re-created by restoring the initial state
/// and a saved generator checkpoint and re-simulating; this costs at most as
/// many evaluations again. The stream is left exactly where
/// shortcut_sequence would leave it.
[[nodiscard]] ReplayResult final_state_replay(const Target& target,
                                              StateVector x0,
                                              const SequenceSpec& spec,
                                              RandomStream& stream);

/// Appends one short-cut sequence to a run, mapping local sources to global
/// rows.
void advance_shortcut(const Target& target, ChainCursor& cursor,
                               const SequenceSpec& spec, RandomStream& stream,
                               TraceObserver& observer);

/// Runs the schedule's sequences in order, n_cycles times, each sequence
/// starting from the previous one's final state.
void run_schedule(const Target& target, StateVector x0,
                  const std::vector<SequenceSpec>& schedule,
                  std::size_t n_cycles, RandomStream& stream,
                  TraceObserver& observer);
[[nodiscard]] Trace run_schedule(const Target& target, StateVector x0,
                                 const std::vector<SequenceSpec>& schedule,
                                 std::size_t n_cycles, RandomStream& stream);

}  // namespace shortcut
