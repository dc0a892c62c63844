#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace sgev {

// splitmix64 step (Steele, Lea & Flood).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Collapses (seed, key) into a fresh stream seed with full avalanche.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = key ^ 0xd1b54a32d192ed03ull;
  std::uint64_t b = splitmix64(s);
  s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  return splitmix64(s);
}

// Deterministic counter-based stream.  substream(key) depends only on the
// construction seed, not on draws already taken, so derived streams are
// stable no matter which thread touches the parent first.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform on the open interval (0,1); endpoints are unreachable.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller; consumes two uniforms, caches nothing.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  Rng substream(std::uint64_t key) const { return Rng(mix_seed(seed_, key)); }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace sgev
