#pragma once

#include "slh/common.hpp"

#include <random>

namespace slh {

// Deterministic RNG wrapper. mt19937_64's raw output sequence is pinned by
// the C++ standard, but the std::*_distribution adapters are not, so every
// distribution mapping here is written out explicitly. Two builds on any
// platform given the same seed produce identical streams.
class DetRng {
 public:
  explicit DetRng(uint64_t seed) : engine_(seed), seed_(seed) {}

  uint64_t u64() { return engine_(); }

  // Unbiased integer in [0, bound) by rejection sampling.
  uint64_t below(uint64_t bound);

  // Integer in [lo, hi], both inclusive.
  int64_t between(int64_t lo, int64_t hi);

  // Real in [0, 1) with 53 random bits.
  double real01() { return double(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * real01(); }

  bool chance(double p) { return real01() < p; }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  Bytes bytes(size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = size_t(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream derived from the construction seed and a
  // label, not from the current engine position. Streams for different
  // purposes never collide even with small consecutive seeds.
  DetRng substream(std::string_view label) const;

  uint64_t seed() const { return seed_; }

 private:
  std::mt19937_64 engine_;
  uint64_t seed_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace slh
