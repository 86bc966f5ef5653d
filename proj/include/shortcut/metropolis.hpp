#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "shortcut/rng.hpp"
#include "shortcut/targets.hpp"
#include "shortcut/trace.hpp"

namespace shortcut {

/// Proposal offsets w*delta are rounded to multiples of this quantum, and
/// initial states are snapped to the same lattice. For |x| < 2^23 every sum
/// x + w*delta is then exact in double precision, so an accepted step undone
/// by its negated offset returns the original coordinates bit-for-bit. The
/// rounding is symmetric (q(-a) == -q(a)), so the proposal stays symmetric.
inline constexpr double kProposalQuantum = 0x1.0p-30;

[[nodiscard]] double quantize(double value);
[[nodiscard]] StateVector snap_to_lattice(StateVector x);

/// Auxiliary variables of one Metropolis update: the proposal offset and an
/// Exp(1) draw (always > 0).
struct AuxiliaryPair {
  StateVector delta;
  double e = 1.0;
};

[[nodiscard]] AuxiliaryPair draw_auxiliary(std::size_t dimension,
                                           RandomStream& stream);

struct StepOutcome {
  StateVector state;
  double log_density = 0.0;
  AuxiliaryPair aux;
  bool rejected = false;
};

/// The deterministic Metropolis map on (x, delta, e). With
///   gain = log pi(x + w delta) - log pi(x),
/// the step is accepted iff e + gain > 0; then x' = x + w delta,
/// delta' = -delta and e' = e + gain. Otherwise everything is returned
/// unchanged. The map is its own inverse. Exactly one density evaluation is
/// performed; a -infinity proposal is always rejected.
[[nodiscard]] StepOutcome t_met_apply(const Target& target,
                                      std::span<const double> x,
                                      double log_density_x, double w,
                                      const AuxiliaryPair& aux);

/// One random-walk Metropolis update: delta ~ N(0, I), e ~ Exp(1), then
/// t_met_apply. Draw order is delta (coordinate order) then e.
[[nodiscard]] StepOutcome standard_update(const Target& target,
                                          std::span<const double> x,
                                          double log_density_x, double w,
                                          RandomStream& stream);

/// Appends n standard updates with stepsize w as one sequence.
void advance_standard(const Target& target, ChainCursor& cursor, double w,
                      std::size_t n_updates, RandomStream& stream,
                      TraceObserver& observer);

void run_standard(const Target& target, StateVector x0, double w,
                  std::size_t n_updates, RandomStream& stream,
                  TraceObserver& observer);
[[nodiscard]] Trace run_standard(const Target& target, StateVector x0,
                                 double w, std::size_t n_updates,
                                 RandomStream& stream);

struct NaiveAdaptiveSettings {
  double w_small = 2.0;
  double w_large = 20.0;
  std::size_t window = 10;
  std::size_t threshold = 5;
};

/// Picks w_small when more than `threshold` of the last `window` updates were
/// rejections, w_large otherwise. Until `window` updates exist the large
/// stepsize is used. This breaks the Markov property and is biased; it exists
/// as a baseline. Each record carries the stepsize it used.
class NaiveAdaptiveState {
 public:
  explicit NaiveAdaptiveState(const NaiveAdaptiveSettings& settings);

  [[nodiscard]] double next_stepsize() const;
  void record(bool rejected);

 private:
  NaiveAdaptiveSettings settings_;
  std::vector<bool> history_;  // ring buffer of the last `window` flags
  std::size_t updates_ = 0;
  std::size_t recent_rejections_ = 0;
};

/// Appends n naive adaptive updates as one sequence. The window state
/// persists across calls through `state`.
void advance_naive_adaptive(const Target& target, ChainCursor& cursor,
                            NaiveAdaptiveState& state, std::size_t n_updates,
                            RandomStream& stream, TraceObserver& observer);

void run_naive_adaptive(const Target& target, StateVector x0,
                        const NaiveAdaptiveSettings& settings,
                        std::size_t n_updates, RandomStream& stream,
                        TraceObserver& observer);
[[nodiscard]] Trace run_naive_adaptive(const Target& target, StateVector x0,
                                       const NaiveAdaptiveSettings& settings,
                                       std::size_t n_updates,
                                       RandomStream& stream);

}  // namespace shortcut
