#pragma once

#include "slh/image.hpp"
#include "slh/record.hpp"
#include "slh/rs_code.hpp"

namespace slh {

// Watermark payload: 96 bytes of authentication data, Reed-Solomon coded to a
// 128-byte (1024-bit) block before embedding.
//   asic_signature     32   proof hash binding the image to a device
//   timestamp_utc       8   big-endian seconds
//   patient_id_hash    16
//   facility_id         8
//   image_content_hash 32   sha256 of the LSB-zeroed pixels
struct WatermarkPayload {
  Digest256 asic_signature{};
  uint64_t timestamp_utc = 0;
  std::array<uint8_t, 16> patient_id_hash{};
  FacilityId facility_id{};
  Digest256 image_content_hash{};

  RsData serialize() const;
  static WatermarkPayload deserialize(const RsData& data);

  bool operator==(const WatermarkPayload&) const = default;
};

constexpr size_t kWatermarkBits = kRsBlock * 8;  // 1024 per copy
constexpr size_t kDefaultRedundancy = 3;

// Writes `redundancy` interleaved copies of the coded payload into pixel
// LSBs. Each RS symbol occupies the LSBs of 8 consecutive pixels (one
// cell, MSB first); cells are assigned by a keyed deterministic shuffle, so
// a localized damage region touches few symbols of any one copy. Requires
// width*height >= redundancy*1024 and a payload whose image_content_hash
// matches the cover image.
GrayImage embed_watermark(const GrayImage& img, const WatermarkPayload& payload,
                          size_t redundancy, const std::array<uint8_t, 8>& key);

struct ExtractResult {
  WatermarkPayload payload;
  size_t copy_index = 0;  // which copy decoded first
  size_t corrected = 0;   // symbols repaired in that copy
  // true when the payload's image_content_hash matches the received image;
  // false means the payload survived but the pixels were altered.
  bool content_verified = false;
};

// Reads all copies, decodes each in order, first success wins. Throws
// Errc::corruption when every copy is uncorrectable.
ExtractResult extract_watermark(const GrayImage& img, size_t redundancy,
                                const std::array<uint8_t, 8>& key);

enum class DamageKind : uint8_t {
  lsb_noise,    // flip each LSB independently with probability p
  pixel_noise,  // replace each pixel with uniform random with probability p
  crop_edge,    // zero a border band covering the given area fraction
};

const char* to_string(DamageKind kind);
DamageKind damage_kind_from_string(std::string_view s);

GrayImage damage_image(const GrayImage& img, DamageKind kind, double param,
                       uint64_t seed);

}  // namespace slh
