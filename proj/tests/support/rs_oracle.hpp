// Parity oracle for the Reed-Solomon encoder: schoolbook polynomial long
// division over GF(2^8) using shift-and-reduce multiplication. Shares no
// tables or code paths with the library implementation.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace testsupport {

inline uint8_t gf_slow_mul(uint8_t a, uint8_t b) {
  uint8_t result = 0;
  while (b) {
    if (b & 1) result ^= a;
    bool carry = a & 0x80;
    a <<= 1;
    if (carry) a ^= 0x1D;  // x^8 ≡ x^4+x^3+x^2+1 (mod 0x11D)
    b >>= 1;
  }
  return result;
}

// g(x) = Π_{i=0}^{31} (x - α^i) with α = 2, coefficients highest first.
inline std::vector<uint8_t> rs_oracle_generator() {
  std::vector<uint8_t> g{1};
  uint8_t alpha_i = 1;  // α^0
  for (int i = 0; i < 32; ++i) {
    std::vector<uint8_t> next(g.size() + 1, 0);
    for (size_t j = 0; j < g.size(); ++j) {
      next[j] ^= g[j];                              // x · g
      next[j + 1] ^= gf_slow_mul(g[j], alpha_i);    // root · g
    }
    g = std::move(next);
    alpha_i = gf_slow_mul(alpha_i, 2);
  }
  return g;
}

inline std::array<uint8_t, 32> rs_oracle_parity(const std::array<uint8_t, 96>& data) {
  static const std::vector<uint8_t> g = rs_oracle_generator();
  std::vector<uint8_t> work(128, 0);
  for (int i = 0; i < 96; ++i) work[i] = data[i];
  for (int i = 0; i < 96; ++i) {
    uint8_t coef = work[i];
    if (coef == 0) continue;
    for (size_t j = 0; j < g.size(); ++j) {
      work[i + j] ^= gf_slow_mul(g[j], coef);
    }
  }
  std::array<uint8_t, 32> parity{};
  for (int i = 0; i < 32; ++i) parity[i] = work[96 + i];
  return parity;
}

}  // namespace testsupport
