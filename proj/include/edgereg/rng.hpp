#pragma once

#include <cstdint>

namespace edgereg::core {

// splitmix64-v1. Hand-rolled (not std::uniform_int_distribution) so that
// seeded outputs are byte-identical across platforms and standard libraries.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // value in [0, n); fixed-point scaling, deterministic everywhere
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // exact Bernoulli(num/den) draw for den <= 2^32
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

  SplitMix64 split() { return SplitMix64(next() ^ 0x5851f42d4c957f2dULL); }
};

}  // namespace edgereg::core
