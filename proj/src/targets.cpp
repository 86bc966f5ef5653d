#include "shortcut/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace shortcut {

double Target::log_density(std::span<const double> x) const {
  if (x.size() != dimension()) {
    throw std::invalid_argument("state of length " + std::to_string(x.size()) +
                                " given to target '" + name() +
                                "' of dimension " +
                                std::to_string(dimension()));
  }
  return evaluate(x);
}

namespace {

class Mixture1d final : public Target {
 public:
  std::string name() const override { return "mixture1d"; }
  std::size_t dimension() const override { return 1; }
  std::optional<KnownMoments> known_moments() const override {
    return KnownMoments{{5.0}, {75.5}};
  }

 protected:
  double evaluate(std::span<const double> x) const override {
    // log(1/2) - log(sqrt(2 pi))
    constexpr double log_half_inv_sqrt_2pi = -std::numbers::ln2 - 0.91893853320467274178;
    const double z_wide = x[0] / 10.0;
    const double z_narrow = x[0] - 10.0;
    const double a = log_half_inv_sqrt_2pi - std::log(10.0) - 0.5 * z_wide * z_wide;
    const double b = log_half_inv_sqrt_2pi - 0.5 * z_narrow * z_narrow;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
  }
};

class DiagonalGaussian final : public Target {
 public:
  DiagonalGaussian(std::vector<double> variances, std::string name)
      : variances_(std::move(variances)), name_(std::move(name)) {
    if (variances_.empty()) {
      throw std::invalid_argument("diagonal gaussian needs at least one variance");
    }
    for (double v : variances_) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument("diagonal gaussian variances must be finite and > 0");
      }
    }
  }

  std::string name() const override { return name_; }
  std::size_t dimension() const override { return variances_.size(); }
  std::optional<KnownMoments> known_moments() const override {
    return KnownMoments{std::vector<double>(variances_.size(), 0.0), variances_};
  }

 protected:
  double evaluate(std::span<const double> x) const override {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * x[i] / variances_[i];
    return -0.5 * sum;
  }

 private:
  std::vector<double> variances_;
  std::string name_;
};

class Funnel final : public Target {
 public:
  std::string name() const override { return "funnel"; }
  std::size_t dimension() const override { return 10; }
  std::optional<KnownMoments> known_moments() const override {
    // Only v has finite, simple moments worth attaching; the x_i have mean 0
    // and variance E[e^v] = e^{4.5}.
    KnownMoments m;
    m.mean.assign(10, 0.0);
    m.variance.assign(10, std::exp(4.5));
    m.variance[0] = 9.0;
    return m;
  }

 protected:
  double evaluate(std::span<const double> x) const override {
    const double v = x[0];
    double ss = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) ss += x[i] * x[i];
    return -v * v / 18.0 - 4.5 * v - std::exp(-v) * ss / 2.0;
  }
};

}  // namespace

TargetPtr make_mixture1d() { return std::make_shared<Mixture1d>(); }

TargetPtr make_diagonal_gaussian(std::vector<double> variances, std::string name) {
  return std::make_shared<DiagonalGaussian>(std::move(variances), std::move(name));
}

TargetPtr make_mvgauss7() {
  return make_diagonal_gaussian({1.0, 1.0, 0.01, 0.01, 0.01, 0.01, 0.01}, "mvgauss7");
}

TargetPtr make_funnel() { return std::make_shared<Funnel>(); }

TargetPtr make_target(const std::string& name) {
  if (name == "mixture1d") return make_mixture1d();
  if (name == "mvgauss7") return make_mvgauss7();
  if (name == "funnel") return make_funnel();
  throw std::invalid_argument("unknown target '" + name + "'");
}

}  // namespace shortcut
