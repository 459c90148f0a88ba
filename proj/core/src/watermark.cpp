#include "slh/watermark.hpp"

#include "slh/rng.hpp"

#include <algorithm>
#include <numeric>

namespace slh {

RsData WatermarkPayload::serialize() const {
  RsData out{};
  uint8_t* p = out.data();
  std::copy(asic_signature.begin(), asic_signature.end(), p);
  for (int i = 0; i < 8; ++i) p[32 + i] = uint8_t(timestamp_utc >> (8 * (7 - i)));
  std::copy(patient_id_hash.begin(), patient_id_hash.end(), p + 40);
  std::copy(facility_id.begin(), facility_id.end(), p + 56);
  std::copy(image_content_hash.begin(), image_content_hash.end(), p + 64);
  return out;
}

WatermarkPayload WatermarkPayload::deserialize(const RsData& data) {
  WatermarkPayload p;
  const uint8_t* d = data.data();
  std::copy(d, d + 32, p.asic_signature.begin());
  p.timestamp_utc = get_u64be(d + 32);
  std::copy(d + 40, d + 56, p.patient_id_hash.begin());
  std::copy(d + 56, d + 64, p.facility_id.begin());
  std::copy(d + 64, d + 96, p.image_content_hash.begin());
  return p;
}

namespace {

// Shuffled cell order shared by embed and extract. Cell i covers pixels
// [8i, 8i+8); the key seeds the shuffle.
std::vector<uint32_t> cell_order(size_t pixel_count,
                                 const std::array<uint8_t, 8>& key) {
  std::vector<uint32_t> cells(pixel_count / 8);
  std::iota(cells.begin(), cells.end(), 0u);
  DetRng rng(get_u64be(key.data()));
  rng.shuffle(cells);
  return cells;
}

void check_capacity(const GrayImage& img, size_t redundancy) {
  if (redundancy == 0) {
    throw Error(Errc::bad_argument, "redundancy must be at least 1");
  }
  if (img.pixel_count() < redundancy * kWatermarkBits) {
    throw Error(Errc::bad_argument, "insufficient capacity");
  }
}

}  // namespace

GrayImage embed_watermark(const GrayImage& img, const WatermarkPayload& payload,
                          size_t redundancy, const std::array<uint8_t, 8>& key) {
  check_capacity(img, redundancy);
  if (payload.image_content_hash != image_content_hash(img)) {
    throw Error(Errc::bad_argument, "payload image content hash mismatch");
  }

  RsBlock coded = rs_encode(payload.serialize());
  auto cells = cell_order(img.pixel_count(), key);

  GrayImage out = img;
  for (size_t i = 0; i < redundancy * kRsBlock; ++i) {
    uint8_t symbol = coded[i / redundancy];  // copies interleaved symbol-wise
    size_t base = size_t(cells[i]) * 8;
    for (size_t bit = 0; bit < 8; ++bit) {
      uint8_t b = (symbol >> (7 - bit)) & 1;
      out.pixels[base + bit] = uint8_t((out.pixels[base + bit] & 0xFE) | b);
    }
  }
  return out;
}

ExtractResult extract_watermark(const GrayImage& img, size_t redundancy,
                                const std::array<uint8_t, 8>& key) {
  check_capacity(img, redundancy);
  auto cells = cell_order(img.pixel_count(), key);

  for (size_t copy = 0; copy < redundancy; ++copy) {
    RsBlock block{};
    for (size_t sym = 0; sym < kRsBlock; ++sym) {
      size_t base = size_t(cells[sym * redundancy + copy]) * 8;
      uint8_t value = 0;
      for (size_t bit = 0; bit < 8; ++bit) {
        value = uint8_t((value << 1) | (img.pixels[base + bit] & 1));
      }
      block[sym] = value;
    }
    auto decoded = rs_decode(block);
    if (!decoded) continue;

    ExtractResult res;
    res.payload = WatermarkPayload::deserialize(decoded->data);
    res.copy_index = copy;
    res.corrected = decoded->corrected;
    res.content_verified =
        res.payload.image_content_hash == image_content_hash(img);
    return res;
  }
  throw Error(Errc::corruption, "all copies failed");
}

const char* to_string(DamageKind kind) {
  switch (kind) {
    case DamageKind::lsb_noise: return "lsb_noise";
    case DamageKind::pixel_noise: return "pixel_noise";
    case DamageKind::crop_edge: return "crop_edge";
  }
  return "unknown";
}

DamageKind damage_kind_from_string(std::string_view s) {
  if (s == "lsb_noise") return DamageKind::lsb_noise;
  if (s == "pixel_noise") return DamageKind::pixel_noise;
  if (s == "crop_edge") return DamageKind::crop_edge;
  throw Error(Errc::bad_argument, "unknown damage kind");
}

GrayImage damage_image(const GrayImage& img, DamageKind kind, double param,
                       uint64_t seed) {
  if (!(param >= 0.0 && param <= 1.0)) {
    throw Error(Errc::bad_argument, "damage parameter must be in [0,1]");
  }
  GrayImage out = img;
  DetRng rng(seed);

  switch (kind) {
    case DamageKind::lsb_noise:
      for (auto& px : out.pixels) {
        if (rng.chance(param)) px ^= 1;
      }
      break;

    case DamageKind::pixel_noise:
      for (auto& px : out.pixels) {
        if (rng.chance(param)) px = uint8_t(rng.below(256));
      }
      break;

    case DamageKind::crop_edge: {
      // Smallest border band whose area reaches the requested fraction.
      size_t w = img.width, h = img.height;
      double target = param * double(img.pixel_count());
      size_t band = 0;
      for (; band <= (std::max(w, h) + 1) / 2; ++band) {
        size_t iw = w > 2 * band ? w - 2 * band : 0;
        size_t ih = h > 2 * band ? h - 2 * band : 0;
        if (double(img.pixel_count() - iw * ih) >= target) break;
      }
      for (size_t y = 0; y < h; ++y) {
        for (size_t x = 0; x < w; ++x) {
          if (x < band || y < band || x >= w - band || y >= h - band) {
            out.pixels[y * w + x] = 0;
          }
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace slh
