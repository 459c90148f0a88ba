#include "slh/uint256.hpp"

namespace slh {

Uint256 Uint256::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw Error(Errc::parse_error, "Uint256 hex must be 64 digits");
  Bytes raw = slh::from_hex(hex);
  Digest256 d;
  std::memcpy(d.data(), raw.data(), 32);
  return from_digest(d);
}

std::string Uint256::to_hex() const { return slh::to_hex(to_digest()); }

Uint256 div_2e256_by(unsigned __int128 divisor) {
  if (divisor < 2) throw Error(Errc::bad_argument, "divisor must be at least 2");

  // Restoring binary long division of the 257-bit value 2^256. The running
  // remainder stays below the divisor, so after the shift it is below
  // 2·divisor ≤ 2^129 − 2; the wrapped 128-bit representation is still exact
  // once the divisor is subtracted back out.
  Uint256 q;
  unsigned __int128 rem = 0;
  for (int i = 256; i >= 0; --i) {
    bool carry = (rem >> 127) & 1;
    rem = (rem << 1) | (i == 256 ? 1 : 0);
    if (carry || rem >= divisor) {
      rem -= divisor;
      if (i < 256) {  // quotient bit 256 would overflow; divisor ≥ 2 never sets it
        q.limb[3 - i / 64] |= uint64_t(1) << (i % 64);
      }
    }
  }
  return q;
}

}  // namespace slh
