#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace grasp {

// Seeded random stream with hand-rolled distributions so that sequences are
// bit-identical across standard libraries (std::uniform_real_distribution is
// implementation-defined; the engine itself is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Multiply-shift; bias is O(n / 2^64).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller, one value per call (the pair's second half is cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Independent substream for (seed, index, purpose). Both protocol endpoints
// derive the same per-attempt streams from a shared seed, which is how a
// split-process session sees one consistent world.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t index,
                      std::uint64_t purpose) {
  std::uint64_t s = detail::splitmix64(seed);
  s = detail::splitmix64(s ^ index);
  s = detail::splitmix64(s ^ purpose);
  return Rng(s);
}

// Purpose tags for derive_rng.
inline constexpr std::uint64_t kStreamSpawn = 1;
inline constexpr std::uint64_t kStreamOracle = 2;
inline constexpr std::uint64_t kStreamPolicy = 3;
inline constexpr std::uint64_t kStreamNoise = 4;
inline constexpr std::uint64_t kStreamShuffle = 5;
inline constexpr std::uint64_t kStreamGradCheck = 6;
inline constexpr std::uint64_t kStreamEval = 7;

}  // namespace grasp
