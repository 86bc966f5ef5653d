#pragma once

#include <array>
#include <cstdint>

namespace shortcut {

/// Full snapshot of a RandomStream. Restoring it reproduces every later draw
/// bit-for-bit. Checkpoints live in memory only.
struct RngCheckpoint {
  std::uint32_t version = 0;
  std::array<std::uint64_t, 4> state{};
  bool has_spare = false;
  double spare = 0.0;
  std::uint64_t uniforms_drawn = 0;
  std::uint64_t gaussians_drawn = 0;
};

/// xoshiro256** stream seeded through splitmix64, with Marsaglia polar
/// Gaussians. The cached second polar variate is part of the checkpoint, so
/// the number of uniforms consumed per Gaussian never matters for replay.
///
/// A stream has a single owner; independent chains use independent seeds.
class RandomStream {
 public:
  static constexpr std::uint32_t kVersion = 1;

  explicit RandomStream(std::uint64_t seed);

  /// Uniform on the open interval (0,1); both endpoints are excluded so that
  /// -log(u) is finite and strictly positive.
  double next_uniform();
  double next_gaussian();
  /// -log(u), an Exp(1) draw that is always > 0.
  double next_exponential();

  [[nodiscard]] RngCheckpoint checkpoint() const;
  /// Throws std::invalid_argument when the checkpoint came from another
  /// generator version.
  void restore(const RngCheckpoint& snapshot);

  [[nodiscard]] std::uint64_t uniforms_drawn() const { return uniforms_drawn_; }
  [[nodiscard]] std::uint64_t gaussians_drawn() const { return gaussians_drawn_; }

 private:
  std::uint64_t next_bits();

  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
  std::uint64_t uniforms_drawn_ = 0;
  std::uint64_t gaussians_drawn_ = 0;
};

}  // namespace shortcut
