#pragma once
// Counter-based deterministic RNG.
//
// Every Monte Carlo replication draws from its own stream, derived from
// (master_seed, stream_index) via splitmix64 mixing.  Streams are therefore
// independent of scheduling: replication r sees the same observations no
// matter how many worker threads run, and extending a run to a larger
// horizon replays the same prefix.  Core generator is xoshiro256++.

#include <cmath>
#include <cstdint>

namespace timerobust {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stable mix of two 64-bit values; used to derive per-point master seeds
// (e.g. one per mu-grid entry) and per-replication stream keys.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
  std::uint64_t z = splitmix64(s);
  s ^= b + 0x9e3779b97f4a7c15ULL;
  return z ^ splitmix64(s);
}

class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t sm = mix_seed(master_seed, stream_index);
    for (auto& word : s_) word = splitmix64(sm);
    have_cached_normal_ = false;
    cached_normal_ = 0.0;
  }

  std::uint64_t next_u64() {
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

  // Uniform on (0,1]: never returns 0, so log(u) is finite.
  double uniform_pos() {
    return ((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0,1).
  double uniform() {
    return (next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  bool have_cached_normal_;
  double cached_normal_;
};

}  // namespace timerobust
