#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "shortcut/diagnostics.hpp"
#include "shortcut/engine.hpp"
#include "shortcut/rng.hpp"

using namespace shortcut;

namespace {

// Direct O(n * max_lag) autocorrelations with denominator n.
std::vector<double> naive_autocorrelations(const std::vector<double>& x, std::size_t max_lag) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  auto cov = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < x.size(); ++t) s += (x[t] - mean) * (x[t + k] - mean);
    return s / n;
  };
  const double c0 = cov(0);
  std::vector<double> rho;
  for (std::size_t k = 1; k <= max_lag; ++k) rho.push_back(cov(k) / c0);
  return rho;
}

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
  RandomStream s(seed);
  std::vector<double> x(n);
  double v = s.next_gaussian() / std::sqrt(1 - phi * phi);
  for (auto& xi : x) {
    xi = v;
    v = phi * v + s.next_gaussian();
  }
  return x;
}

}  // namespace

TEST_CASE("FFT autocorrelations agree with the direct sum") {
  for (std::size_t n : {257u, 1000u, 5003u}) {
    const auto x = ar1(0.8, n, n);
    const auto fast = autocorrelations(x, 100);
    const auto slow = naive_autocorrelations(x, 100);
    CHECK_FALSE(fast.degenerate);
    REQUIRE(fast.rho.size() == 100);
    for (std::size_t k = 0; k < 100; ++k) CHECK(fast.rho[k] == doctest::Approx(slow[k]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("alternating series has lag-one autocorrelation near -1") {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? -1.0 : 1.0;
  const auto ac = autocorrelations(x, 2);
  CHECK(ac.rho[0] == doctest::Approx(-0.999).epsilon(1e-9));
  CHECK(ac.rho[1] == doctest::Approx(0.998).epsilon(1e-9));
}

TEST_CASE("iid series: small autocorrelations and tau near 1") {
  RandomStream s(9);
  std::vector<double> x(1000000);
  for (auto& v : x) v = s.next_gaussian();
  const auto ac = autocorrelations(x, 10);
  for (double r : ac.rho) CHECK(std::abs(r) < 0.004);
  const double tau = act_estimate(x, 100);
  CHECK(std::abs(tau - 1.0) < 3 * 2 * std::sqrt(100.0 / 1e6));
}

TEST_CASE("AR(1) with coefficient 0.5: rho_1 = 0.5 and tau = 3") {
  const auto x = ar1(0.5, 1000000, 4);
  CHECK(autocorrelations(x, 1).rho[0] == doctest::Approx(0.5).epsilon(0.02));
  CHECK(act_estimate(x, 50) == doctest::Approx(3.0).epsilon(0.1 / 3));
}

TEST_CASE("tau is invariant under affine maps") {
  const auto x = ar1(0.9, 20000, 5);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = -3.5 * x[i] + 100.0;
  CHECK(act_estimate(y, 200) == doctest::Approx(act_estimate(x, 200)).epsilon(1e-9));
}

TEST_CASE("constant and too-short series") {
  const std::vector<double> c(100, 0.1);
  const auto ac = autocorrelations(c, 10);
  CHECK(ac.degenerate);
  for (double r : ac.rho) CHECK(r == 0.0);
  CHECK(act_estimate(c, 10) == 1.0);
  CHECK_THROWS_AS((void)autocorrelations(c, 100), std::invalid_argument);
  CHECK_THROWS_AS((void)autocorrelations(c, 0), std::invalid_argument);
}

TEST_CASE("effective sample size and standard error") {
  auto a = ess_and_se(1200000, 10.2, 75.5);
  CHECK(a.ess == doctest::Approx(1200000 / 10.2));
  CHECK(a.se == doctest::Approx(0.025).epsilon(0.02));
  auto b = ess_and_se(1980000, 53.0, 75.5);
  CHECK(b.se == doctest::Approx(0.045).epsilon(0.01));
  auto c = ess_and_se(1000, 0.4, 4.0);
  CHECK(c.ess == 1000.0);
  CHECK(c.se == doctest::Approx(std::sqrt(4.0 / 1000)));
  CHECK_THROWS_AS((void)ess_and_se(0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)ess_and_se(10, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("diagnose picks the variance by mode") {
  const auto x = ar1(0.5, 50000, 6);
  const auto known = diagnose(x, 50, VarianceMode::known, 4.0 / 3.0);
  const auto sample = diagnose(x, 50, VarianceMode::sample);
  CHECK(known.variance == 4.0 / 3.0);
  CHECK(sample.variance == doctest::Approx(sample_variance(x)));
  CHECK(known.tau == sample.tau);
  CHECK(known.standard_error == doctest::Approx(std::sqrt(known.variance / known.ess)));
  CHECK(known.states_used == 50000);
}

TEST_CASE("block averages") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(block_averages(x, 2).means == std::vector<double>{1.5, 3.5});
  CHECK(block_averages(x, 4).means == std::vector<double>{2.5});
  CHECK(block_averages(x, 1).means == x);
  const auto odd = block_averages(std::vector<double>{1, 2, 3, 4, 5}, 2);
  CHECK(odd.means.size() == 2);
  CHECK(odd.dropped == 1);
  CHECK_THROWS_AS((void)block_averages(x, 0), std::invalid_argument);

  const auto y = ar1(0.3, 6000, 3);
  const auto pq = block_averages(y, 12).means;
  const auto p_then_q = block_averages(block_averages(y, 3).means, 4).means;
  REQUIRE(pq.size() == p_then_q.size());
  for (std::size_t i = 0; i < pq.size(); ++i) CHECK(pq[i] == doctest::Approx(p_then_q[i]).epsilon(1e-12));
}

TEST_CASE("trace statistics count copied updates through their recorded flags") {
  const auto t = make_mixture1d();
  RandomStream s(21);
  const Trace trace = run_schedule(*t, {0.0}, {{2.0, 5, 6, 0, 4}, {20.0, 5, 18, 0, 4}}, 300, s);
  const TraceStats st = trace_stats(trace);
  CHECK(st.updates == trace.records.size() - 1);
  CHECK(st.evaluations == trace.evaluations);
  CHECK(st.rejected == st.rejected_computed + st.rejected_copied);
  CHECK(st.copied > 0);

  std::size_t copied_rejections = 0;
  for (const auto& r : trace.records) {
    if (r.provenance == Provenance::copied && trace.records[r.source].rejected) ++copied_rejections;
  }
  CHECK(copied_rejections == st.rejected_copied);

  std::size_t updates = 0, copied = 0;
  for (const auto& [w, by] : st.by_stepsize) {
    updates += by.updates;
    copied += by.copied;
  }
  CHECK(updates == st.updates);
  CHECK(copied == st.copied);
  CHECK(st.by_stepsize.at(2.0).updates == 300 * 30);
  CHECK(st.by_stepsize.at(20.0).updates == 300 * 90);

  RandomStream s2(1);
  const TraceStats plain = trace_stats(run_standard(*t, {0.0}, 2.0, 1000, s2));
  CHECK(plain.copy_fraction() == 0.0);
  CHECK(plain.evaluations == 1001);
  CHECK_THROWS_AS((void)trace_stats(Trace{}), std::invalid_argument);
}
