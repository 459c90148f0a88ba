#pragma once

#include "slh/common.hpp"

namespace slh::gf256 {

// GF(2^8) with the 0x11D reduction polynomial (x^8+x^4+x^3+x^2+1) and
// generator element 2. exp_table covers two periods so mul can skip the
// mod-255 reduction.
struct Tables {
  uint8_t exp[512];
  uint8_t log[256];
};

constexpr Tables make_tables() {
  Tables t{};
  int x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[i] = uint8_t(x);
    t.log[x] = uint8_t(i);
    x <<= 1;
    if (x & 0x100) x ^= 0x11D;
  }
  for (int i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
  t.log[0] = 0;  // log(0) is undefined; callers must branch on zero first
  return t;
}

inline constexpr Tables kTables = make_tables();

inline uint8_t mul(uint8_t a, uint8_t b) {
  if (a == 0 || b == 0) return 0;
  return kTables.exp[kTables.log[a] + kTables.log[b]];
}

inline uint8_t div(uint8_t a, uint8_t b) {
  if (b == 0) throw Error(Errc::bad_argument, "gf256 division by zero");
  if (a == 0) return 0;
  return kTables.exp[kTables.log[a] + 255 - kTables.log[b]];
}

inline uint8_t inv(uint8_t a) {
  if (a == 0) throw Error(Errc::bad_argument, "gf256 inverse of zero");
  return kTables.exp[255 - kTables.log[a]];
}

// alpha^e for any integer exponent (negative exponents wrap mod 255)
inline uint8_t alpha_pow(int e) {
  e %= 255;
  if (e < 0) e += 255;
  return kTables.exp[e];
}

inline int log_of(uint8_t a) {
  if (a == 0) throw Error(Errc::bad_argument, "gf256 log of zero");
  return kTables.log[a];
}

}  // namespace slh::gf256
