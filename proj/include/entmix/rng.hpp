#pragma once

#include <cstdint>

namespace entmix {

// splitmix64 step; also used to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless 64-bit finalizer (splitmix64 mixing function).
inline std::uint64_t hash64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seed of the substream identified by (tag, id) under a master seed.
// Derivation depends only on the triple, never on draw order, so streams
// for different rows/trials commute.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t id = 0) {
  std::uint64_t h = hash64(seed + 0x9e3779b97f4a7c15ULL * (tag + 1));
  return hash64(h + 0xbf58476d1ce4e5b9ULL * (id + 1));
}

// Substream tags. Every consumer of randomness draws from its own tag so
// that adding a feature never shifts another feature's stream.
namespace stream_tag {
constexpr std::uint64_t row_targets = 1;  // sigma_i resolution draws
constexpr std::uint64_t pareto_row = 2;   // heavy-tailed row regeneration
constexpr std::uint64_t walk = 3;         // environment-owned walk stream
constexpr std::uint64_t trial_slot = 4;   // per-trial slot draws
constexpr std::uint64_t trial_target = 5; // per-trial target draws
constexpr std::uint64_t trial_start = 6;  // per-trial start states
constexpr std::uint64_t starts = 7;       // start-set sampling
constexpr std::uint64_t env = 8;          // per-trial environment seeds
constexpr std::uint64_t pick = 9;         // size-biased picks
constexpr std::uint64_t misc = 10;
}  // namespace stream_tag

// xoshiro256++, seeded through splitmix64.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  static Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t id = 0) {
    return Rng(stream_seed(seed, tag, id));
  }

  std::uint64_t next() {
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

  // Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n). Lemire's method with rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    std::uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        x = next();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  int uniform_int(int n) { return static_cast<int>(uniform_index(static_cast<std::uint64_t>(n))); }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t s_[4];
};

}  // namespace entmix
