#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace pdprl {

// SplitMix64 step; used to derive independent stream seeds from a root seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a child seed from (seed, key). Chain calls for deeper hierarchies,
// e.g. derive(derive(root, epoch), instance_index).
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t key) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + key);
  std::uint64_t a = splitmix64(s);
  s ^= key * 0xff51afd7ed558ccdULL;
  return a ^ splitmix64(s);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return derive(derive(seed, a), b);
}

inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) {
  return derive(derive(derive(seed, a), b), c);
}

// Seedable stream with portable uniform/normal transforms. mt19937_64 output
// is fully specified by the standard; the distribution transforms are written
// out by hand because std::uniform_real_distribution and
// std::normal_distribution are implementation-defined and would break
// bit-identical regeneration across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    gen_.seed(splitmix64(s));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log argument.
  double uniform_pos() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (cosine branch only, for a fixed
  // two-draws-per-sample stream layout).
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Integer in [0, bound) by rejection-free scaling (bound << 2^64 here).
  std::uint64_t below(std::uint64_t bound) { return gen_() % bound; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pdprl
