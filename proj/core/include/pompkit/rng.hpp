#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace pompkit {

/// Random stream used by every stochastic routine.
///
/// The engine is xoshiro256++ seeded through splitmix64. Each stream also
/// carries a 64-bit key that identifies it independently of how many numbers
/// have been drawn. Two ways of deriving child streams exist:
///
///   * `split()` advances a split counter on this stream and returns a child
///     keyed by (key, counter). Use it from sequential orchestration code.
///   * `substream(i...)` is const and derives a child keyed by (key, i...).
///     Use it for per-particle and per-simulation streams.
///
/// Both derivations are pure functions of the parent key and the arguments,
/// so a run is fully determined by the master seed.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) { reseed(mix(seed ^ 0x6a09e667f3bcc909ULL)); }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  Rng split() { return derived(mix(key_ ^ mix(++splits_ + 0x3c6ef372fe94f82bULL))); }

  Rng substream(std::uint64_t a) const { return derived(mix(key_ ^ mix(a + 0xbb67ae8584caa73bULL))); }
  Rng substream(std::uint64_t a, std::uint64_t b) const { return substream(a).substream(b); }
  Rng substream(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return substream(a).substream(b).substream(c);
  }

  std::uint64_t key() const noexcept { return key_; }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() { return normal_(*this); }
  double normal(double mean, double sd) { return mean + sd * normal_(*this); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  Rng derived(std::uint64_t key) const {
    Rng r;
    r.reseed(key);
    return r;
  }

  void reseed(std::uint64_t key) {
    key_ = key;
    splits_ = 0;
    std::uint64_t z = key;
    for (auto& word : s_) {
      z += 0x9e3779b97f4a7c15ULL;
      word = mix(z);
    }
    normal_.reset();
  }

  std::uint64_t key_ = 0;
  std::uint64_t splits_ = 0;
  std::array<std::uint64_t, 4> s_{};
  std::normal_distribution<double> normal_;
};

}  // namespace pompkit
