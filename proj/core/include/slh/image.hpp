#pragma once

#include "slh/common.hpp"
#include "slh/sha256.hpp"

#include <string>

namespace slh {

// 8-bit grayscale raster, row-major.
struct GrayImage {
  size_t width = 0;
  size_t height = 0;
  Bytes pixels;

  size_t pixel_count() const { return width * height; }
  uint8_t at(size_t x, size_t y) const { return pixels[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

GrayImage make_image(size_t width, size_t height, uint8_t fill = 0);

// Copy with every pixel's least significant bit cleared.
GrayImage lsb_zeroed(const GrayImage& img);

// sha256 over the LSB-zeroed pixel bytes. Stable under watermark embedding,
// sensitive to any change in the upper seven bits of any pixel.
Digest256 image_content_hash(const GrayImage& img);

// Peak signal-to-noise ratio in dB; +infinity for identical images.
// Dimensions must match.
double psnr(const GrayImage& a, const GrayImage& b);

// Binary PGM (P5), maxval 255 only. The canonical bit-exact container.
Bytes encode_pgm(const GrayImage& img);
GrayImage decode_pgm(const Bytes& data);

GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

}  // namespace slh
