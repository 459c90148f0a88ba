#pragma once

#include "slh/common.hpp"

#include <compare>

namespace slh {

// Fixed-width 256-bit unsigned integer, stored as four 64-bit limbs, most
// significant first. Only the operations the proof-of-work target logic
// needs are provided.
struct Uint256 {
  uint64_t limb[4] = {0, 0, 0, 0};  // limb[0] is the most significant

  static Uint256 zero() { return {}; }
  static Uint256 max() { return {{~0ull, ~0ull, ~0ull, ~0ull}}; }

  // Interprets a 32-byte digest as a big-endian integer.
  static Uint256 from_digest(const Digest256& d) {
    Uint256 v;
    for (int i = 0; i < 4; ++i) v.limb[i] = get_u64be(d.data() + 8 * i);
    return v;
  }

  static Uint256 from_hex(std::string_view hex);  // exactly 64 hex digits

  Digest256 to_digest() const {
    Digest256 d;
    Bytes tmp;
    tmp.reserve(32);
    for (int i = 0; i < 4; ++i) put_u64be(tmp, limb[i]);
    std::memcpy(d.data(), tmp.data(), 32);
    return d;
  }

  std::string to_hex() const;

  friend std::strong_ordering operator<=>(const Uint256& a, const Uint256& b) {
    for (int i = 0; i < 4; ++i) {
      if (a.limb[i] != b.limb[i]) return a.limb[i] <=> b.limb[i];
    }
    return std::strong_ordering::equal;
  }
  friend bool operator==(const Uint256& a, const Uint256& b) = default;
};

// floor(2^256 / divisor) for a nonzero 128-bit divisor. Computed by binary
// long division; the remainder always fits in 128 bits so the loop never
// overflows.
Uint256 div_2e256_by(unsigned __int128 divisor);

}  // namespace slh
