#include "shortcut/engine.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace shortcut {

void SequenceSpec::validate() const {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw std::invalid_argument("sequence stepsize w must be finite and > 0");
  }
  if (group_size == 0) throw std::invalid_argument("group size L must be >= 1");
  if (group_count == 0) throw std::invalid_argument("group count M must be >= 1");
  if (min_rejections > max_rejections || max_rejections > group_size) {
    throw std::invalid_argument("rejection bounds must satisfy 0 <= l <= h <= L (got l=" +
                                std::to_string(min_rejections) + ", h=" +
                                std::to_string(max_rejections) + ", L=" +
                                std::to_string(group_size) + ")");
  }
}

SequenceSpec SequenceSpec::no_reversals(double w, std::size_t group_size,
                                        std::size_t group_count) {
  return SequenceSpec{w, group_size, group_count, 0, group_size};
}

std::size_t SequenceTrace::copied() const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.provenance == Provenance::copied;
  return n;
}

namespace {

// The walk is tracked on a line of boundary positions b. Slot coordinate c
// joins boundaries c and c+1; non-negative coordinates map to index slots
// 0, 1, ... and negative ones wrap to K-1, K-2, ... Every slot acts as an
// involution between its two boundary states, so each boundary has exactly
// one state no matter how often it is revisited. Groups always start on
// multiples of L.
class Walk {
 public:
  Walk(std::size_t K) : K_(static_cast<long>(K)) {}

  [[nodiscard]] std::size_t slot_index(long c) const {
    return static_cast<std::size_t>(c >= 0 ? c : K_ + c);
  }
  [[nodiscard]] std::size_t boundary_index(long b) const {
    return static_cast<std::size_t>(b + K_);
  }
  [[nodiscard]] std::size_t boundary_count() const {
    return static_cast<std::size_t>(2 * K_ + 1);
  }

 private:
  long K_;
};

struct Boundary {
  bool known = false;
  std::size_t record = 0;  // a row holding this boundary's state
  std::size_t origin = 0;  // a row holding this state with rejected == false, or 0
  double log_density = 0.0;
};

struct Slot {
  bool computed = false;
  bool rejected = false;
  int direction = +1;      // direction in which it was computed
  std::size_t record = 0;  // the computed row
};

}  // namespace

SequenceTrace shortcut_sequence(const Target& target, StateVector x0,
                                const SequenceSpec& spec, RandomStream& stream) {
  x0 = snap_to_lattice(std::move(x0));
  const double lp0 = target.log_density(x0);
  return shortcut_sequence(target, std::move(x0), lp0, spec, stream);
}

SequenceTrace shortcut_sequence(const Target& target, StateVector x0,
                                double log_density_x0, const SequenceSpec& spec,
                                RandomStream& stream) {
  spec.validate();
  if (!(log_density_x0 > -INFINITY)) {
    throw std::invalid_argument("short-cut sequence started at a zero-density state");
  }
  const std::size_t K = spec.length();
  const std::size_t L = spec.group_size;
  const std::size_t dim = target.dimension();
  const Walk walk(K);

  SequenceTrace out;
  out.records.reserve(K + 1);
  out.group_ends.reserve(spec.group_count + 1);
  out.consumed.resize(K);

  std::vector<Boundary> boundaries(walk.boundary_count());
  std::vector<Slot> slots(K);

  TraceRecord first;
  first.state = snap_to_lattice(std::move(x0));
  first.log_density = log_density_x0;
  first.w = spec.w;
  out.records.push_back(std::move(first));
  boundaries[walk.boundary_index(0)] = Boundary{true, 0, 0, log_density_x0};
  out.group_ends.push_back(out.records[0].state);

  long pos = 0;
  int dir = +1;
  for (std::size_t g = 0; g < spec.group_count; ++g) {
    const long start = pos;
    std::size_t rejections = 0;
    for (std::size_t t = 0; t < L; ++t) {
      const long c = dir > 0 ? pos : pos - 1;
      const long next = pos + dir;
      Slot& slot = slots[walk.slot_index(c)];
      Boundary& there = boundaries[walk.boundary_index(next)];

      TraceRecord rec;
      rec.w = spec.w;
      rec.group = g;
      rec.step = out.records.size();
      if (!slot.computed) {
        const Boundary& here = boundaries[walk.boundary_index(pos)];
        assert(here.known && !there.known);
        AuxiliaryPair aux = draw_auxiliary(dim, stream);
        StepOutcome step =
            t_met_apply(target, out.records[here.record].state, here.log_density, spec.w, aux);
        out.consumed[walk.slot_index(c)] = std::move(aux);
        const std::size_t row = out.records.size();
        slot = Slot{true, step.rejected, dir, row};
        there = Boundary{true, row, step.rejected ? here.origin : row, step.log_density};
        rec.state = std::move(step.state);
        rec.log_density = step.log_density;
        rec.rejected = step.rejected;
        ++out.evaluations;
      } else {
        assert(there.known);
        // Undoing an accepted step lands on the state before it; any row with
        // that state and an accepted flag is a valid source.
        const std::size_t src =
            (slot.direction == dir || slot.rejected) ? slot.record : there.origin;
        rec.state = out.records[src].state;
        rec.log_density = there.log_density;
        rec.rejected = slot.rejected;
        rec.provenance = Provenance::copied;
        rec.source = src;
      }
      rejections += rec.rejected;
      pos = next;
      out.records.push_back(std::move(rec));
    }
    if (spec.out_of_range(rejections)) {
      out.reversals.push_back(ReversalEvent{g, dir, -dir});
      pos = start;
      dir = -dir;
    }
    out.group_ends.push_back(
        out.records[boundaries[walk.boundary_index(pos)].record].state);
  }

  const Boundary& last = boundaries[walk.boundary_index(pos)];
  out.final_log_density = last.log_density;
  out.final_origin = last.origin;
  return out;
}

SequenceTrace reference_sequence(const Target& target, StateVector x0,
                                 const SequenceSpec& spec,
                                 const std::vector<AuxiliaryPair>& auxiliaries) {
  spec.validate();
  const std::size_t K = spec.length();
  const std::size_t L = spec.group_size;
  if (auxiliaries.size() != K) {
    throw std::invalid_argument("reference_sequence needs exactly K = " +
                                std::to_string(K) + " auxiliary pairs, got " +
                                std::to_string(auxiliaries.size()));
  }
  std::vector<AuxiliaryPair> aux = auxiliaries;

  StateVector x = snap_to_lattice(std::move(x0));
  double lp = target.log_density(x);

  SequenceTrace out;
  out.records.reserve(K + 1);
  TraceRecord first;
  first.state = x;
  first.log_density = lp;
  first.w = spec.w;
  out.records.push_back(std::move(first));
  out.group_ends.push_back(x);

  std::size_t i = 0;
  int s = +1;
  auto step_index = [K](std::size_t index, int direction) {
    return direction > 0 ? (index + 1) % K : (index + K - 1) % K;
  };

  std::vector<std::pair<std::size_t, AuxiliaryPair>> saved;
  saved.reserve(L);
  for (std::size_t g = 0; g < spec.group_count; ++g) {
    const StateVector start_x = x;
    const double start_lp = lp;
    const std::size_t start_i = i;
    saved.clear();
    std::size_t rejections = 0;
    for (std::size_t t = 0; t < L; ++t) {
      if (t > 0) i = step_index(i, s);
      saved.emplace_back(i, aux[i]);
      StepOutcome step = t_met_apply(target, x, lp, spec.w, aux[i]);
      aux[i] = std::move(step.aux);
      x = std::move(step.state);
      lp = step.log_density;
      rejections += step.rejected;
      ++out.evaluations;

      TraceRecord rec;
      rec.state = x;
      rec.log_density = lp;
      rec.w = spec.w;
      rec.rejected = step.rejected;
      rec.group = g;
      rec.step = out.records.size();
      out.records.push_back(std::move(rec));
    }
    if (spec.out_of_range(rejections)) {
      for (auto it = saved.rbegin(); it != saved.rend(); ++it) aux[it->first] = it->second;
      x = start_x;
      lp = start_lp;
      i = start_i;
      out.reversals.push_back(ReversalEvent{g, s, -s});
      s = -s;
    }
    out.group_ends.push_back(x);
    i = step_index(i, s);
  }
  out.final_log_density = lp;
  return out;
}

std::vector<AuxiliaryPair> materialize_auxiliaries(const SequenceTrace& trace,
                                                   std::size_t dimension) {
  std::vector<AuxiliaryPair> aux;
  aux.reserve(trace.consumed.size());
  for (const auto& slot : trace.consumed) {
    aux.push_back(slot ? *slot : AuxiliaryPair{StateVector(dimension, 0.0), 1.0});
  }
  return aux;
}

ReplayResult final_state_replay(const Target& target, StateVector x0,
                                const SequenceSpec& spec, RandomStream& stream) {
  spec.validate();
  const std::size_t K = spec.length();
  const std::size_t L = spec.group_size;
  const Walk walk(K);

  const StateVector initial = snap_to_lattice(std::move(x0));
  const double initial_lp = target.log_density(initial);
  if (!(initial_lp > -INFINITY)) {
    throw std::invalid_argument("short-cut sequence started at a zero-density state");
  }

  enum : std::uint8_t { kUnknown, kAccepted, kRejected };
  std::vector<std::uint8_t> slots(K, kUnknown);

  ReplayResult result;
  StateVector current = initial;
  double current_lp = initial_lp;
  long current_pos = 0;

  const RngCheckpoint upper_start = stream.checkpoint();
  std::optional<RngCheckpoint> lower_start;

  long pos = 0;
  int dir = +1;
  for (std::size_t g = 0; g < spec.group_count; ++g) {
    const long start = pos;
    std::size_t rejections = 0;
    for (std::size_t t = 0; t < L; ++t) {
      const long c = dir > 0 ? pos : pos - 1;
      auto& slot = slots[walk.slot_index(c)];
      if (slot == kUnknown) {
        // Fresh slots sit at the frontier of either the upper or the lower
        // region; the lower region always grows from the initial state.
        if (pos != current_pos) {
          assert(pos == 0);
          current = initial;
          current_lp = initial_lp;
          current_pos = 0;
        }
        if (c < 0 && !lower_start) lower_start = stream.checkpoint();
        StepOutcome step = standard_update(target, current, current_lp, spec.w, stream);
        ++result.evaluations;
        slot = step.rejected ? kRejected : kAccepted;
        current = std::move(step.state);
        current_lp = step.log_density;
        current_pos = pos + dir;
      }
      rejections += slot == kRejected;
      pos += dir;
    }
    if (spec.out_of_range(rejections)) {
      pos = start;
      dir = -dir;
    }
  }

  if (pos == current_pos) {
    result.final_state = std::move(current);
    result.final_log_density = current_lp;
  } else if (pos == 0) {
    result.final_state = initial;
    result.final_log_density = initial_lp;
  } else {
    const RngCheckpoint end = stream.checkpoint();
    stream.restore(pos > 0 ? upper_start : *lower_start);
    StateVector x = initial;
    double lp = initial_lp;
    const long steps = pos > 0 ? pos : -pos;
    for (long k = 0; k < steps; ++k) {
      StepOutcome step = standard_update(target, x, lp, spec.w, stream);
      ++result.evaluations;
      x = std::move(step.state);
      lp = step.log_density;
    }
    stream.restore(end);
    result.final_state = std::move(x);
    result.final_log_density = lp;
  }
  return result;
}

void advance_shortcut(const Target& target, ChainCursor& cursor,
                      const SequenceSpec& spec, RandomStream& stream,
                      TraceObserver& observer) {
  SequenceTrace seq =
      shortcut_sequence(target, cursor.state, cursor.log_density, spec, stream);

  const std::size_t sequence = cursor.next_sequence++;
  const std::size_t first_row = cursor.next_row;
  const std::size_t initial_origin = cursor.origin_row;
  auto global = [&](std::size_t local) {
    return local == 0 ? initial_origin : first_row + local - 1;
  };

  SequenceSummary summary;
  summary.sequence = sequence;
  summary.w = spec.w;
  summary.updates = spec.length();
  summary.reversals = seq.reversals.size();
  summary.evaluations = seq.evaluations;
  summary.initial_state = cursor.state;

  for (std::size_t k = 1; k < seq.records.size(); ++k) {
    TraceRecord& rec = seq.records[k];
    rec.sequence = sequence;
    if (rec.provenance == Provenance::copied) {
      rec.source = global(rec.source);
      ++summary.copied;
    }
    summary.rejected += rec.rejected;
    observer.on_record(rec);
  }

  cursor.next_row += spec.length();
  cursor.state = seq.final_state();
  cursor.log_density = seq.final_log_density;
  cursor.origin_row = global(seq.final_origin);
  cursor.evaluations += seq.evaluations;

  summary.final_state = cursor.state;
  summary.group_ends = std::move(seq.group_ends);
  observer.on_sequence_end(summary);
}

void run_schedule(const Target& target, StateVector x0,
                  const std::vector<SequenceSpec>& schedule,
                  std::size_t n_cycles, RandomStream& stream,
                  TraceObserver& observer) {
  if (schedule.empty()) throw std::invalid_argument("schedule must not be empty");
  for (const auto& spec : schedule) spec.validate();
  ChainCursor cursor = ChainCursor::start(target, std::move(x0), observer);
  for (std::size_t cycle = 0; cycle < n_cycles; ++cycle) {
    for (const auto& spec : schedule) advance_shortcut(target, cursor, spec, stream, observer);
  }
}

Trace run_schedule(const Target& target, StateVector x0,
                   const std::vector<SequenceSpec>& schedule,
                   std::size_t n_cycles, RandomStream& stream) {
  TraceCollector collector;
  run_schedule(target, std::move(x0), schedule, n_cycles, stream, collector);
  return collector.take();
}

}  // namespace shortcut
