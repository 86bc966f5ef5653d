#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "shortcut/trace.hpp"

namespace shortcut {

struct Autocorrelations {
  std::vector<double> rho;  // rho[k-1] is the lag-k autocorrelation, k = 1..max_lag
  bool degenerate = false;  // zero sample variance; all rho are 0
};

/// Sample autocorrelations about the sample mean with denominator n (not
/// n - k), computed by zero-padded FFT. Requires series.size() > max_lag.
[[nodiscard]] Autocorrelations autocorrelations(std::span<const double> series,
                                                std::size_t max_lag);

/// 1 + 2 * sum_{k=1}^{max_lag} rho_k, reported raw (it may fall below 1).
[[nodiscard]] double act_estimate(std::span<const double> series,
                                  std::size_t max_lag);

enum class VarianceMode { known, sample };

struct EssSe {
  double ess = 0.0;
  double se = 0.0;
};

/// ESS = n / max(tau, 1), SE = sqrt(variance / ESS).
[[nodiscard]] EssSe ess_and_se(std::size_t n_states, double tau, double variance);

[[nodiscard]] double sample_mean(std::span<const double> series);
/// Denominator n, matching the autocovariance convention.
[[nodiscard]] double sample_variance(std::span<const double> series);

struct BlockAverages {
  std::vector<double> means;
  std::size_t dropped = 0;  // trailing values that did not fill a block
};

/// Means of consecutive non-overlapping blocks. Throws std::invalid_argument
/// when block_len is 0.
[[nodiscard]] BlockAverages block_averages(std::span<const double> series,
                                           std::size_t block_len);

struct DiagnosticsReport {
  std::size_t states_used = 0;
  double rejection_rate = 0.0;
  double copy_fraction = 0.0;
  double tau = 0.0;
  double ess = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  VarianceMode variance_mode = VarianceMode::sample;
  double standard_error = 0.0;
  std::uint64_t evaluations = 0;
  bool degenerate = false;
};

/// Estimate of the mean of one tracked series with its autocorrelation-based
/// standard error. `known_variance` is used in known mode.
[[nodiscard]] DiagnosticsReport diagnose(std::span<const double> series,
                                         std::size_t max_lag, VarianceMode mode,
                                         double known_variance = 0.0);

struct StepsizeStats {
  std::size_t updates = 0;
  std::size_t rejected = 0;
  std::size_t copied = 0;
  std::uint64_t evaluations = 0;

  [[nodiscard]] double rejection_rate() const;
  [[nodiscard]] double copy_fraction() const;
};

struct TraceStats {
  std::size_t updates = 0;  // rows after the initial one
  std::size_t rejected = 0;
  std::size_t rejected_computed = 0;
  std::size_t rejected_copied = 0;
  std::size_t copied = 0;
  std::uint64_t evaluations = 0;  // includes the initial evaluation
  std::map<double, StepsizeStats> by_stepsize;

  [[nodiscard]] double rejection_rate() const;
  [[nodiscard]] double copy_fraction() const;
};

/// Streaming form of trace_stats, usable as a run observer.
class TraceStatsAccumulator final : public TraceObserver {
 public:
  void on_record(const TraceRecord& record) override;
  [[nodiscard]] const TraceStats& stats() const { return stats_; }

 private:
  TraceStats stats_;
  bool seen_initial_ = false;
};

/// Rejection rate over all updates, copied ones included through their
/// recorded flags; copy fractions overall and per stepsize.
[[nodiscard]] TraceStats trace_stats(const Trace& trace);

}  // namespace shortcut
