#include "shortcut/diagnostics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace shortcut {

namespace {

// FFTW's planner is not thread-safe; executing a plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

double sample_mean(std::span<const double> series) {
  if (series.empty()) return 0.0;
  double sum = 0.0;
  for (double v : series) sum += v;
  return sum / static_cast<double>(series.size());
}

double sample_variance(std::span<const double> series) {
  if (series.empty()) return 0.0;
  const double mean = sample_mean(series);
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(series.size());
}

Autocorrelations autocorrelations(std::span<const double> series,
                                  std::size_t max_lag) {
  const std::size_t n = series.size();
  if (max_lag == 0) throw std::invalid_argument("max_lag must be >= 1");
  if (n <= max_lag) {
    throw std::invalid_argument("series of length " + std::to_string(n) +
                                " is too short for max_lag " + std::to_string(max_lag));
  }

  Autocorrelations out;
  out.rho.assign(max_lag, 0.0);

  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) {
    out.degenerate = true;
    return out;
  }

  const double mean = sample_mean(series);
  const std::size_t m = next_power_of_two(n + max_lag);
  const std::size_t bins = m / 2 + 1;

  std::unique_ptr<double[], FftwFree> buf(fftw_alloc_real(m));
  std::unique_ptr<fftw_complex[], FftwFree> spec(fftw_alloc_complex(bins));
  fftw_plan forward, backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(m), buf.get(), spec.get(), FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(m), spec.get(), buf.get(), FFTW_ESTIMATE);
  }

  for (std::size_t t = 0; t < n; ++t) buf[t] = series[t] - mean;
  std::fill(buf.get() + n, buf.get() + m, 0.0);
  fftw_execute(forward);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = spec[k][0], im = spec[k][1];
    spec[k][0] = re * re + im * im;
    spec[k][1] = 0.0;
  }
  fftw_execute(backward);  // unnormalized: every lag sum is scaled by m

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  const double c0 = buf[0];
  for (std::size_t k = 1; k <= max_lag; ++k) out.rho[k - 1] = buf[k] / c0;
  return out;
}

double act_estimate(std::span<const double> series, std::size_t max_lag) {
  const Autocorrelations ac = autocorrelations(series, max_lag);
  double sum = 0.0;
  for (double r : ac.rho) sum += r;
  return 1.0 + 2.0 * sum;
}

EssSe ess_and_se(std::size_t n_states, double tau, double variance) {
  if (n_states == 0) throw std::invalid_argument("ess_and_se needs n_states >= 1");
  if (variance < 0.0) throw std::invalid_argument("variance must be >= 0");
  EssSe out;
  out.ess = static_cast<double>(n_states) / std::max(tau, 1.0);
  out.se = std::sqrt(variance / out.ess);
  return out;
}

BlockAverages block_averages(std::span<const double> series, std::size_t block_len) {
  if (block_len == 0) throw std::invalid_argument("block length must be >= 1");
  BlockAverages out;
  const std::size_t blocks = series.size() / block_len;
  out.means.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    out.means.push_back(sample_mean(series.subspan(b * block_len, block_len)));
  }
  out.dropped = series.size() - blocks * block_len;
  return out;
}

DiagnosticsReport diagnose(std::span<const double> series, std::size_t max_lag,
                           VarianceMode mode, double known_variance) {
  DiagnosticsReport r;
  r.states_used = series.size();
  r.mean = sample_mean(series);
  r.variance_mode = mode;
  r.variance = mode == VarianceMode::known ? known_variance : sample_variance(series);
  const Autocorrelations ac = autocorrelations(series, max_lag);
  r.degenerate = ac.degenerate;
  double sum = 0.0;
  for (double rho : ac.rho) sum += rho;
  r.tau = 1.0 + 2.0 * sum;
  const EssSe es = ess_and_se(series.size(), r.tau, r.variance);
  r.ess = es.ess;
  r.standard_error = es.se;
  return r;
}

double StepsizeStats::rejection_rate() const {
  return updates ? static_cast<double>(rejected) / static_cast<double>(updates) : 0.0;
}

double StepsizeStats::copy_fraction() const {
  return updates ? static_cast<double>(copied) / static_cast<double>(updates) : 0.0;
}

double TraceStats::rejection_rate() const {
  return updates ? static_cast<double>(rejected) / static_cast<double>(updates) : 0.0;
}

double TraceStats::copy_fraction() const {
  return updates ? static_cast<double>(copied) / static_cast<double>(updates) : 0.0;
}

void TraceStatsAccumulator::on_record(const TraceRecord& record) {
  const bool computed = record.provenance == Provenance::computed;
  if (computed) ++stats_.evaluations;
  if (!seen_initial_) {
    seen_initial_ = true;
    return;
  }
  ++stats_.updates;
  StepsizeStats& by_w = stats_.by_stepsize[record.w];
  ++by_w.updates;
  if (computed) {
    ++by_w.evaluations;
  } else {
    ++stats_.copied;
    ++by_w.copied;
  }
  if (record.rejected) {
    ++stats_.rejected;
    ++by_w.rejected;
    ++(computed ? stats_.rejected_computed : stats_.rejected_copied);
  }
}

TraceStats trace_stats(const Trace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("trace_stats needs a nonempty trace");
  TraceStatsAccumulator acc;
  for (const auto& r : trace.records) acc.on_record(r);
  return acc.stats();
}

}  // namespace shortcut
