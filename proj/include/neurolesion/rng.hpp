#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace neurolesion {

// SplitMix64. Every random decision in the project flows through this
// generator so runs are bit-reproducible from a 64-bit seed.
struct SplitMix64 {
  std::uint64_t state = 0;

  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; draws two uniforms per call, no cached spare.
  double next_gaussian(double mean, double sigma) {
    double u1 = 1.0 - next_double();  // (0, 1], keeps log finite
    double u2 = next_double();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    return mean + sigma * z;
  }

  std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
};

// Named substreams. A derived seed is a pure function of
// (base seed, purpose, a, b), so e.g. the dropout mask at step t or the
// Poisson train of input neuron i never depends on draw order elsewhere.
enum class Stream : std::uint64_t {
  kWeightInit = 1,
  kDropout = 2,
  kShuffle = 3,
  kPoisson = 4,
  kDataNoise = 5,
  kSeedList = 6,
  kBootstrap = 7,
  kSnnInit = 8,
  kKfold = 9,
  kProbe = 10,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream purpose, std::uint64_t a = 0,
                                 std::uint64_t b = 0) {
  std::uint64_t s = seed;
  s = SplitMix64::mix(s ^ SplitMix64::mix(static_cast<std::uint64_t>(purpose)));
  s = SplitMix64::mix(s ^ SplitMix64::mix(a));
  s = SplitMix64::mix(s ^ SplitMix64::mix(b));
  return s;
}

// Fisher-Yates with a dedicated generator.
template <typename T>
void seeded_shuffle(std::vector<T>& items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace neurolesion
