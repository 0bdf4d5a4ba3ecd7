#pragma once

#include <cstdint>
#include <random>

namespace sentinel {

/// Seeded 64-bit Mersenne Twister with a portable mapping to (0, 1).
/// std::uniform_real_distribution is implementation-defined, so the mapping is
/// done by hand to keep runs reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

  bool bernoulli(double p) { return p > 0.0 && uniform_open() < p; }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; used to derive independent per-replication seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace sentinel
