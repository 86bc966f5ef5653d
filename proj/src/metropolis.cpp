#include "shortcut/metropolis.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shortcut {

double quantize(double value) {
  return std::nearbyint(value / kProposalQuantum) * kProposalQuantum;
}

StateVector snap_to_lattice(StateVector x) {
  for (double& c : x) c = quantize(c);
  return x;
}

AuxiliaryPair draw_auxiliary(std::size_t dimension, RandomStream& stream) {
  AuxiliaryPair aux;
  aux.delta.resize(dimension);
  for (double& d : aux.delta) d = stream.next_gaussian();
  aux.e = stream.next_exponential();
  return aux;
}

StepOutcome t_met_apply(const Target& target, std::span<const double> x,
                        double log_density_x, double w,
                        const AuxiliaryPair& aux) {
  StateVector proposal(x.begin(), x.end());
  for (std::size_t i = 0; i < proposal.size(); ++i) {
    proposal[i] += quantize(w * aux.delta[i]);
  }
  const double log_density_proposal = target.log_density(proposal);
  const double e_after = aux.e + (log_density_proposal - log_density_x);

  StepOutcome out;
  if (e_after > 0.0) {
    out.state = std::move(proposal);
    out.log_density = log_density_proposal;
    out.aux.delta.resize(aux.delta.size());
    for (std::size_t i = 0; i < aux.delta.size(); ++i) out.aux.delta[i] = -aux.delta[i];
    out.aux.e = e_after;
    out.rejected = false;
  } else {
    out.state.assign(x.begin(), x.end());
    out.log_density = log_density_x;
    out.aux = aux;
    out.rejected = true;
  }
  return out;
}

StepOutcome standard_update(const Target& target, std::span<const double> x,
                            double log_density_x, double w,
                            RandomStream& stream) {
  return t_met_apply(target, x, log_density_x, w,
                     draw_auxiliary(x.size(), stream));
}

namespace {

SequenceSummary open_summary(const ChainCursor& cursor, double w) {
  SequenceSummary s;
  s.sequence = cursor.next_sequence;
  s.w = w;
  s.initial_state = cursor.state;
  return s;
}

void emit_standard_step(ChainCursor& cursor, StepOutcome&& step, double w,
                        std::size_t step_index, SequenceSummary& summary,
                        TraceObserver& observer) {
  TraceRecord rec;
  rec.log_density = step.log_density;
  rec.w = w;
  rec.rejected = step.rejected;
  rec.sequence = summary.sequence;
  rec.step = step_index;
  const std::size_t row = cursor.next_row++;
  if (!step.rejected) cursor.origin_row = row;
  cursor.state = std::move(step.state);
  cursor.log_density = step.log_density;
  ++cursor.evaluations;
  ++summary.evaluations;
  ++summary.updates;
  if (step.rejected) ++summary.rejected;
  rec.state = cursor.state;
  observer.on_record(rec);
}

}  // namespace

void advance_standard(const Target& target, ChainCursor& cursor, double w,
                      std::size_t n_updates, RandomStream& stream,
                      TraceObserver& observer) {
  SequenceSummary summary = open_summary(cursor, w);
  for (std::size_t k = 1; k <= n_updates; ++k) {
    emit_standard_step(cursor,
                       standard_update(target, cursor.state, cursor.log_density, w, stream),
                       w, k, summary, observer);
  }
  summary.final_state = cursor.state;
  ++cursor.next_sequence;
  observer.on_sequence_end(summary);
}

void run_standard(const Target& target, StateVector x0, double w,
                  std::size_t n_updates, RandomStream& stream,
                  TraceObserver& observer) {
  ChainCursor cursor = ChainCursor::start(target, std::move(x0), observer);
  advance_standard(target, cursor, w, n_updates, stream, observer);
}

Trace run_standard(const Target& target, StateVector x0, double w,
                   std::size_t n_updates, RandomStream& stream) {
  TraceCollector collector;
  run_standard(target, std::move(x0), w, n_updates, stream, collector);
  return collector.take();
}

NaiveAdaptiveState::NaiveAdaptiveState(const NaiveAdaptiveSettings& settings)
    : settings_(settings) {
  if (settings.window == 0) {
    throw std::invalid_argument("naive adaptive window must be >= 1");
  }
  if (!(settings.w_small > 0.0) || !(settings.w_large > 0.0)) {
    throw std::invalid_argument("naive adaptive stepsizes must be > 0");
  }
  history_.assign(settings.window, false);
}

double NaiveAdaptiveState::next_stepsize() const {
  const bool warm = updates_ >= settings_.window;
  return (warm && recent_rejections_ > settings_.threshold) ? settings_.w_small
                                                            : settings_.w_large;
}

void NaiveAdaptiveState::record(bool rejected) {
  const std::size_t slot = updates_ % settings_.window;
  if (history_[slot]) --recent_rejections_;
  history_[slot] = rejected;
  if (rejected) ++recent_rejections_;
  ++updates_;
}

void advance_naive_adaptive(const Target& target, ChainCursor& cursor,
                            NaiveAdaptiveState& state, std::size_t n_updates,
                            RandomStream& stream, TraceObserver& observer) {
  SequenceSummary summary = open_summary(cursor, state.next_stepsize());
  for (std::size_t k = 1; k <= n_updates; ++k) {
    const double w = state.next_stepsize();
    StepOutcome step = standard_update(target, cursor.state, cursor.log_density, w, stream);
    state.record(step.rejected);
    emit_standard_step(cursor, std::move(step), w, k, summary, observer);
  }
  summary.final_state = cursor.state;
  ++cursor.next_sequence;
  observer.on_sequence_end(summary);
}

void run_naive_adaptive(const Target& target, StateVector x0,
                        const NaiveAdaptiveSettings& settings,
                        std::size_t n_updates, RandomStream& stream,
                        TraceObserver& observer) {
  NaiveAdaptiveState state(settings);
  ChainCursor cursor = ChainCursor::start(target, std::move(x0), observer);
  advance_naive_adaptive(target, cursor, state, n_updates, stream, observer);
}

Trace run_naive_adaptive(const Target& target, StateVector x0,
                         const NaiveAdaptiveSettings& settings,
                         std::size_t n_updates, RandomStream& stream) {
  TraceCollector collector;
  run_naive_adaptive(target, std::move(x0), settings, n_updates, stream, collector);
  return collector.take();
}

}  // namespace shortcut
