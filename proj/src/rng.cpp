#include "shortcut/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace shortcut {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RandomStream::next_bits() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::next_uniform() {
  ++uniforms_drawn_;
  // (n + 0.5) / 2^52 with n in [0, 2^52) is exact in double: never 0, never 1.
  const auto n = static_cast<double>(next_bits() >> 12);
  return (n + 0.5) * 0x1.0p-52;
}

double RandomStream::next_gaussian() {
  ++gaussians_drawn_;
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, r2;
  do {
    u = 2.0 * next_uniform() - 1.0;
    v = 2.0 * next_uniform() - 1.0;
    r2 = u * u + v * v;
  } while (r2 >= 1.0 || r2 == 0.0);
  const double f = std::sqrt(-2.0 * std::log(r2) / r2);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double RandomStream::next_exponential() { return -std::log(next_uniform()); }

RngCheckpoint RandomStream::checkpoint() const {
  return RngCheckpoint{kVersion, s_, has_spare_, spare_, uniforms_drawn_,
                       gaussians_drawn_};
}

void RandomStream::restore(const RngCheckpoint& snapshot) {
  if (snapshot.version != kVersion) {
    throw std::invalid_argument("rng checkpoint version " +
                                std::to_string(snapshot.version) +
                                " is incompatible with generator version " +
                                std::to_string(kVersion));
  }
  s_ = snapshot.state;
  has_spare_ = snapshot.has_spare;
  spare_ = snapshot.spare;
  uniforms_drawn_ = snapshot.uniforms_drawn;
  gaussians_drawn_ = snapshot.gaussians_drawn;
}

}  // namespace shortcut
