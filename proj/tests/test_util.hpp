#pragma once

#include <cstdint>

// Small deterministic generator for property tests; keeps runs reproducible
// without pulling in <random> engine/distribution variability.
struct TestRng {
  std::uint64_t state;

  explicit TestRng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double unit() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};
