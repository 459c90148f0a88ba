#pragma once

#include "slh/gf256.hpp"

#include <optional>

namespace slh {

// Systematic Reed-Solomon RS(255,223) shortened to (128,96): 96 data bytes,
// 32 parity bytes, corrects up to 16 symbol errors. The 127 leading virtual
// symbols are zero and never transmitted. Generator roots are α^0..α^31.
constexpr size_t kRsBlock = 128;
constexpr size_t kRsData = 96;
constexpr size_t kRsParity = 32;
constexpr size_t kRsT = 16;

using RsBlock = std::array<uint8_t, kRsBlock>;
using RsData = std::array<uint8_t, kRsData>;

// Data bytes pass through unchanged; 32 parity bytes are appended.
RsBlock rs_encode(const RsData& data);
Bytes rs_encode(const Bytes& data);  // convenience, throws on wrong length

struct RsDecodeResult {
  RsData data{};
  int corrected = 0;
};

// Berlekamp-Massey + Chien search + Forney. Returns the corrected data and
// the number of symbols repaired, or nullopt when the block is
// uncorrectable. A successful return re-verifies all 32 syndromes, so a
// block within 16 errors of a codeword always decodes to exactly that
// codeword.
std::optional<RsDecodeResult> rs_decode(const RsBlock& block);

}  // namespace slh
