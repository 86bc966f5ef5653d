// Acceptance gate: criteria 1-6 are property checks, 7-10 run the table
// presets at full size with the pinned preset seed. Prints one
// PASS/FAIL line per criterion and exits nonzero if any fail.
//
//   acceptance [criterion numbers...] [--out-dir DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "shortcut/diagnostics.hpp"
#include "shortcut/engine.hpp"
#include "shortcut/metropolis.hpp"
#include "shortcut/presets.hpp"
#include "shortcut/targets.hpp"

using namespace shortcut;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << "failed: " << what;
    }
  }
};

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool relative_close(double a, double b, double tol) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 || std::abs(a - b) <= tol * scale;
}

StateVector draw_from(const Target& t, RandomStream& s) {
  StateVector x(t.dimension());
  if (t.name() == "mixture1d") {
    x[0] = s.next_uniform() < 0.5 ? 10.0 * s.next_gaussian() : 10.0 + s.next_gaussian();
  } else if (t.name() == "funnel") {
    x[0] = 3.0 * s.next_gaussian();
    for (std::size_t i = 1; i < x.size(); ++i) x[i] = std::exp(x[0] / 2) * s.next_gaussian();
  } else {
    const auto km = t.known_moments();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sqrt(km->variance[i]) * s.next_gaussian();
  }
  return snap_to_lattice(std::move(x));
}

double stepsize_for(const Target& t, RandomStream& s) {
  // Log-uniform over the ranges the experiments use.
  if (t.name() == "mixture1d") return std::exp(std::log(0.5) + s.next_uniform() * std::log(80.0));
  if (t.name() == "funnel") return std::exp(std::log(0.01) + s.next_uniform() * std::log(500.0));
  return std::exp(std::log(0.01) + s.next_uniform() * std::log(100.0));
}

SequenceSpec random_spec(RandomStream& s, double w) {
  const std::size_t L = 1 + static_cast<std::size_t>(s.next_uniform() * 6);
  const std::size_t M = 1 + static_cast<std::size_t>(s.next_uniform() * 8);
  const std::size_t l = static_cast<std::size_t>(s.next_uniform() * (L + 1));
  const std::size_t h = l + static_cast<std::size_t>(s.next_uniform() * (L - l + 1));
  return SequenceSpec{w, L, M, l, h};
}

// 1. T_met is an involution.
void criterion_involution(Outcome& o) {
  const TargetPtr targets[] = {make_mixture1d(), make_mvgauss7(), make_funnel()};
  RandomStream s(1001);
  int accepted = 0, rejected = 0;
  double worst_x = 0.0, worst_e = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const Target& t = *targets[k % 3];
    const StateVector x = draw_from(t, s);
    const double lp = t.log_density(x);
    const double w = stepsize_for(t, s);
    const AuxiliaryPair aux = draw_auxiliary(t.dimension(), s);
    const StepOutcome once = t_met_apply(t, x, lp, w, aux);
    if (once.rejected) {
      ++rejected;
      o.require(once.state == x && once.aux.delta == aux.delta && once.aux.e == aux.e &&
                    once.log_density == lp,
                "rejected step is not a bit-exact fixed point");
      continue;
    }
    ++accepted;
    const StepOutcome twice = t_met_apply(t, once.state, once.log_density, w, once.aux);
    o.require(!twice.rejected, "second application rejected");
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double err = std::abs(twice.state[i] - x[i]) / std::max(std::abs(x[i]), 1e-300);
      worst_x = std::max(worst_x, x[i] == twice.state[i] ? 0.0 : err);
    }
    worst_e = std::max(worst_e, std::abs(twice.aux.e - aux.e) / aux.e);
    o.require(twice.aux.delta == aux.delta, "delta not restored");
  }
  o.require(worst_x <= 1e-12, "state relative error " + std::to_string(worst_x));
  o.require(worst_e <= 1e-12, "e relative error " + std::to_string(worst_e));
  o.require(accepted > 1000 && rejected > 1000, "too few accepted or rejected cases");
  if (o.pass) {
    o.detail << accepted << " accepted, " << rejected << " rejected; max state rel err " << worst_x
             << ", max e rel err " << worst_e;
  }
}

// 2. The engine bit-matches the literal executor.
void criterion_oracle(Outcome& o) {
  const TargetPtr targets[] = {make_mixture1d(), make_funnel()};
  RandomStream meta(2002);
  int reversal_runs = 0, copy_runs = 0, full_with_reversal = 0;
  for (int k = 0; k < 1000; ++k) {
    const Target& t = *targets[k % 2];
    const SequenceSpec spec = random_spec(meta, stepsize_for(t, meta));
    const StateVector x0 = draw_from(t, meta);
    RandomStream s(static_cast<std::uint64_t>(k) * 7919 + 1);
    const SequenceTrace fast = shortcut_sequence(t, x0, spec, s);
    const SequenceTrace ref = reference_sequence(t, x0, spec, materialize_auxiliaries(fast, t.dimension()));

    bool same = fast.records.size() == ref.records.size() && fast.group_ends == ref.group_ends &&
                fast.reversals.size() == ref.reversals.size();
    for (std::size_t r = 0; same && r < ref.records.size(); ++r) {
      same = fast.records[r].state == ref.records[r].state &&
             fast.records[r].rejected == ref.records[r].rejected;
    }
    o.require(same, "trajectory mismatch in case " + std::to_string(k));
    const std::size_t K = spec.length();
    o.require(fast.evaluations <= K, "more than K evaluations");
    if (fast.reversals.empty()) o.require(fast.evaluations == K, "no-reversal run copied states");
    o.require((fast.evaluations < K) == (fast.copied() > 0), "evaluation count disagrees with copies");
    reversal_runs += !fast.reversals.empty();
    copy_runs += fast.copied() > 0;
    full_with_reversal += !fast.reversals.empty() && fast.evaluations == K;
  }
  if (o.pass) {
    o.detail << "1000 specs bit-identical; " << reversal_runs << " with reversals, " << copy_runs
             << " with fewer than K evaluations; " << full_with_reversal
             << " reversal runs needed all K (reversal in the last group or a single reversal)";
  }
}

// 3. No-reversal bounds are standard Metropolis.
void criterion_degenerate(Outcome& o) {
  const TargetPtr targets[] = {make_mixture1d(), make_funnel()};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Target& t = *targets[seed % 2];
    RandomStream meta(seed + 50000);
    const double w = stepsize_for(t, meta);
    const std::size_t L = 1 + seed % 6, M = 1 + seed % 8;
    const StateVector x0 = draw_from(t, meta);
    RandomStream a(seed), b(seed);
    const SequenceTrace sc = shortcut_sequence(t, x0, SequenceSpec::no_reversals(w, L, M), a);
    const Trace st = run_standard(t, x0, w, L * M, b);
    bool same = sc.records.size() == st.records.size();
    for (std::size_t r = 0; same && r < sc.records.size(); ++r) {
      same = sc.records[r].state == st.records[r].state && sc.records[r].rejected == st.records[r].rejected;
    }
    o.require(same, "seed " + std::to_string(seed) + " differs from run_standard");
  }
  if (o.pass) o.detail << "100 seeds identical draw for draw";
}

// 4. Two failed groups.
void criterion_two_failed_groups(Outcome& o) {
  const auto t = make_diagonal_gaussian({1.0});
  int runs = 0;
  for (std::size_t L = 1; L <= 6; ++L) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      RandomStream s(seed * 31 + L);
      const SequenceSpec spec{1e6, L, 8, 0, L - 1};
      const StateVector x0{0.5};
      const SequenceTrace tr = shortcut_sequence(*t, x0, spec, s);
      o.require(tr.final_state() == x0, "final state moved (L=" + std::to_string(L) + ")");
      o.require(tr.evaluations == 2 * L, "evaluations " + std::to_string(tr.evaluations) +
                                             " != 2L for L=" + std::to_string(L));
      ++runs;
    }
  }
  if (o.pass) o.detail << runs << " runs (L = 1..6, M = 8) ended at x0 after exactly 2L evaluations";
}

// 5. Memory-light replay.
void criterion_replay(Outcome& o) {
  const TargetPtr targets[] = {make_mixture1d(), make_funnel()};
  double lo = 1e9, hi = 0.0;
  int resimulated = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Target& t = *targets[seed % 2];
    RandomStream meta(seed + 90000);
    const SequenceSpec spec = random_spec(meta, stepsize_for(t, meta));
    const StateVector x0 = draw_from(t, meta);
    RandomStream a(seed), b(seed);
    const SequenceTrace full = shortcut_sequence(t, x0, spec, a);
    const ReplayResult light = final_state_replay(t, x0, spec, b);
    o.require(light.final_state == full.final_state(), "seed " + std::to_string(seed) + " final state differs");
    const double ratio = static_cast<double>(light.evaluations) / static_cast<double>(full.evaluations);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    resimulated += light.evaluations > full.evaluations;
  }
  o.require(lo >= 1.0 && hi <= 2.0, "evaluation ratio outside [1, 2]: " + fmt(lo) + ".." + fmt(hi));
  if (o.pass) {
    o.detail << "200 seeds bit-identical; evaluation ratio " << fmt(lo) << ".." << fmt(hi) << ", "
             << resimulated << " needed re-simulation";
  }
}

// 6. One short-cut sequence leaves the mixture invariant.
void criterion_invariance(Outcome& o) {
  const auto t = make_mixture1d();
  const SequenceSpec spec{20.0, 5, 6, 0, 4};
  RandomStream s(6006);
  const std::size_t n = 100000;
  std::vector<double> after(n);
  for (std::size_t r = 0; r < n; ++r) {
    const StateVector x0 = draw_from(*t, s);
    after[r] = shortcut_sequence(*t, x0, spec, s).final_state()[0];
  }
  const double mean = sample_mean(after);
  const double var = sample_variance(after);
  // Fourth central moment of the mixture: 23201.5.
  const double sd_mean = std::sqrt(75.5 / n);
  const double sd_var = std::sqrt((23201.5 - 75.5 * 75.5) / n);
  o.require(std::abs(mean - 5.0) <= 3 * sd_mean, "mean " + fmt(mean, 4) + " beyond 3 sigma");
  o.require(std::abs(var - 75.5) <= 3 * sd_var, "variance " + fmt(var, 3) + " beyond 3 sigma");
  if (o.pass) {
    o.detail << "mean " << fmt(mean, 4) << " (sigma " << fmt(sd_mean, 4) << "), variance "
             << fmt(var, 3) << " (sigma " << fmt(sd_var, 3) << ")";
  }
}

class PresetCache {
 public:
  explicit PresetCache(std::string out_dir) : out_dir_(std::move(out_dir)) {}
  const Reproduction& get(const std::string& name) {
    auto it = cache_.find(name);
    if (it == cache_.end()) {
      const auto start = std::chrono::steady_clock::now();
      it = cache_.emplace(name, reproduce(name, 1.0, kDefaultPresetSeed, out_dir_)).first;
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("[%s at full size, seed %llu, %.0f s]\n%s\n", name.c_str(),
                  static_cast<unsigned long long>(kDefaultPresetSeed), secs,
                  it->second.table_text().c_str());
      std::fflush(stdout);
    }
    return it->second;
  }

 private:
  std::string out_dir_;
  std::map<std::string, Reproduction> cache_;
};

double rate(const RunReport& r) { return r.stats.rejection_rate(); }
double mean(const RunReport& r) { return r.primary().diagnostics.mean; }
double se(const RunReport& r) { return r.primary().diagnostics.standard_error; }

// 7. Mixture comparison.
void criterion_mixture(Outcome& o, PresetCache& cache) {
  const auto& r = cache.get("mixture1d").reports;
  const double expected[] = {0.274, 0.699, 0.531, 0.590, 0.487};
  for (std::size_t i = 0; i < 5; ++i) {
    o.require(std::abs(rate(r[i]) - expected[i]) <= 0.01,
              r[i].config.label + " rejection rate " + fmt(rate(r[i])) + " vs " + fmt(expected[i]));
  }
  for (std::size_t i : {0, 1, 3, 4}) {
    o.require(std::abs(mean(r[i]) - 5.0) <= 3 * se(r[i]),
              r[i].config.label + " mean " + fmt(mean(r[i])) + " not within 3 SE of 5");
  }
  o.require(mean(r[2]) >= 5.8 && mean(r[2]) <= 6.2, "naive adaptive mean " + fmt(mean(r[2])) + " outside [5.8, 6.2]");
  if (o.pass) {
    o.detail << "rejection rates";
    for (const auto& rep : r) o.detail << ' ' << fmt(rate(rep));
    o.detail << "; naive mean " << fmt(mean(r[2])) << " (" << fmt((mean(r[2]) - 5) / se(r[2]), 1) << " SE from 5)";
  }
}

// 8. Seven-dimensional Gaussian comparison.
void criterion_mvgauss(Outcome& o, PresetCache& cache) {
  const auto& r = cache.get("mvgauss7").reports;
  const double expected[] = {0.169, 0.687, 0.998, 0.618, 0.837, 0.618, 0.618};
  for (std::size_t i = 0; i < 7; ++i) {
    o.require(std::abs(rate(r[i]) - expected[i]) <= 0.01,
              r[i].config.label + " rejection rate " + fmt(rate(r[i])) + " vs " + fmt(expected[i]));
  }
  for (std::size_t i = 0; i < 7; ++i) {
    if (i != 1) o.require(se(r[1]) < se(r[i]), "w=0.1 SE is not the smallest (beaten by " + r[i].config.label + ")");
  }
  std::ostringstream ratios;
  for (std::size_t i = 4; i < 7; ++i) {
    o.require(se(r[i]) < se(r[3]), r[i].config.label + " SE does not beat three-w standard");
    const double adv = std::pow(se(r[3]) / se(r[i]), 2);
    ratios << ' ' << fmt(adv, 2);
    o.require(adv >= 1.3 && adv <= 3.0, r[i].config.label + " squared-SE advantage " + fmt(adv, 2) + " outside [1.3, 3.0]");
  }
  if (o.pass) {
    o.detail << "rejection rates";
    for (const auto& rep : r) o.detail << ' ' << fmt(rate(rep));
    o.detail << "; squared-SE advantages" << ratios.str();
  }
}

// 9. Copy fractions.
void criterion_copy_fractions(Outcome& o, PresetCache& cache) {
  const auto& r = cache.get("mvgauss7").reports;
  const double expected[3][3] = {{0.00, 0.09, 0.95}, {0.49, 0.13, 0.90}, {0.79, 0.12, 0.90}};
  const double ws[] = {0.02, 0.1, 0.5};
  std::ostringstream got;
  for (std::size_t v = 0; v < 3; ++v) {
    const auto& rep = r[4 + v];
    got << (v ? " / " : "");
    for (std::size_t k = 0; k < 3; ++k) {
      const auto it = rep.stats.by_stepsize.find(ws[k]);
      const double cf = it == rep.stats.by_stepsize.end() ? -1.0 : it->second.copy_fraction();
      got << (k ? " " : "") << fmt(cf, 2);
      o.require(std::abs(cf - expected[v][k]) <= 0.05,
                rep.config.label + " w=" + fmt(ws[k], 2) + " copy fraction " + fmt(cf, 2) + " vs " + fmt(expected[v][k], 2));
    }
  }
  if (o.pass) o.detail << "copy fractions " << got.str();
}

// 10. Funnel comparison.
void criterion_funnel(Outcome& o, PresetCache& cache) {
  const auto& r = cache.get("funnel").reports;
  const auto& w075 = r[2];
  const auto& w375 = r[3];
  const auto& four = r[4];
  const auto& sc = r[5];
  o.require(mean(w075) >= 0.3, "w=0.75 mean " + fmt(mean(w075)) + " < 0.3");
  o.require(w075.primary().run_min > -5.0, "w=0.75 visited v = " + fmt(w075.primary().run_min));
  o.require(mean(w375) >= 1.0, "w=3.75 mean " + fmt(mean(w375)) + " < 1.0");
  o.require(std::abs(mean(sc)) <= 3 * se(sc), "short-cut mean " + fmt(mean(sc)) + " not within 3 SE (" + fmt(se(sc)) + ") of 0");
  o.require(sc.primary().min < -5.0 && sc.primary().max > 5.0,
            "short-cut sampled v range [" + fmt(sc.primary().min) + ", " + fmt(sc.primary().max) + "]");
  const double adv = std::pow(se(four) / se(sc), 2);
  o.require(adv >= 1.1 && adv <= 2.2, "squared-SE advantage " + fmt(adv, 2) + " outside [1.1, 2.2]");
  if (o.pass) {
    o.detail << "means w0.75 " << fmt(mean(w075)) << " (min v over all states " << fmt(w075.primary().run_min)
             << "), w3.75 " << fmt(mean(w375)) << ", short-cut " << fmt(mean(sc)) << " +- " << fmt(se(sc))
             << " (v range " << fmt(sc.primary().min, 2) << ".." << fmt(sc.primary().max, 2)
             << "); squared-SE advantage " << fmt(adv, 2) << "; " << sc.sequences << " short-cut sequences";
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  std::string out_dir;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out-dir" && i + 1 < argc) {
      out_dir = argv[++i];
    } else {
      selected.insert(std::atoi(arg.c_str()));
    }
  }

  PresetCache cache(out_dir);
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"T_met involution", criterion_involution},
      {"engine equals literal executor", criterion_oracle},
      {"no-reversal bounds equal standard Metropolis", criterion_degenerate},
      {"two failed groups cost 2L and stay at x0", criterion_two_failed_groups},
      {"memory-light replay", criterion_replay},
      {"invariance at stationarity", criterion_invariance},
      {"mixture comparison", [&](Outcome& o) { criterion_mixture(o, cache); }},
      {"seven-dimensional Gaussian comparison", [&](Outcome& o) { criterion_mvgauss(o, cache); }},
      {"seven-dimensional Gaussian copy fractions", [&](Outcome& o) { criterion_copy_fractions(o, cache); }},
      {"funnel comparison", [&](Outcome& o) { criterion_funnel(o, cache); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) continue;
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("CRITERION %d %s: %s: %s\n", number, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
