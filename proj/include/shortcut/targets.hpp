#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shortcut {

/// A point in the target's state space; length equals Target::dimension().
using StateVector = std::vector<double>;

struct KnownMoments {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Unnormalized log density. Evaluation is pure: the same input gives the
/// same bits, which replay equivalence depends on. A value of -infinity means
/// zero density; +infinity and NaN are never returned by the built-in targets.
class Target {
 public:
  virtual ~Target() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  [[nodiscard]] virtual std::size_t dimension() const = 0;
  [[nodiscard]] virtual std::optional<KnownMoments> known_moments() const {
    return std::nullopt;
  }

  /// Throws std::invalid_argument when x has the wrong length.
  [[nodiscard]] double log_density(std::span<const double> x) const;

 protected:
  [[nodiscard]] virtual double evaluate(std::span<const double> x) const = 0;
};

using TargetPtr = std::shared_ptr<const Target>;

/// Equal mixture of N(0, 10^2) and N(10, 1), with its true normalizing
/// constant. Mean 5, variance 75.5.
TargetPtr make_mixture1d();

/// Zero-mean Gaussian with diagonal covariance; log density is 0 at the mean.
TargetPtr make_diagonal_gaussian(std::vector<double> variances,
                                 std::string name = "diag-gauss");

/// Seven dimensions, variances (1, 1, 0.01, 0.01, 0.01, 0.01, 0.01).
TargetPtr make_mvgauss7();

/// Ten-dimensional funnel over (v, x_1..x_9): v ~ N(0, 9) and
/// x_i | v ~ N(0, e^v). Log density
///   -v^2/18 - (9/2) v - e^{-v} * sum(x_i^2) / 2,
/// which is 0 at the origin. E[v] = 0, Var[v] = 9.
TargetPtr make_funnel();

/// Looks up "mixture1d", "mvgauss7" or "funnel". Throws std::invalid_argument
/// for anything else.
TargetPtr make_target(const std::string& name);

}  // namespace shortcut
