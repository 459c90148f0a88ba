#include "slh/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace slh {

GrayImage make_image(size_t width, size_t height, uint8_t fill) {
  if (width == 0 || height == 0) {
    throw Error(Errc::bad_argument, "image dimensions must be positive");
  }
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(width * height, fill);
  return img;
}

GrayImage lsb_zeroed(const GrayImage& img) {
  GrayImage out = img;
  for (auto& px : out.pixels) px &= 0xFE;
  return out;
}

Digest256 image_content_hash(const GrayImage& img) {
  Bytes buf(img.pixels);
  for (auto& px : buf) px &= 0xFE;
  return sha256(buf);
}

double psnr(const GrayImage& a, const GrayImage& b) {
  if (a.width != b.width || a.height != b.height) {
    throw Error(Errc::bad_argument, "image dimensions differ");
  }
  double sum_sq = 0.0;
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    double d = double(a.pixels[i]) - double(b.pixels[i]);
    sum_sq += d * d;
  }
  if (sum_sq == 0.0) return std::numeric_limits<double>::infinity();
  double mse = sum_sq / double(a.pixels.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

Bytes encode_pgm(const GrayImage& img) {
  if (img.pixels.size() != img.pixel_count()) {
    throw Error(Errc::bad_argument, "pixel buffer does not match dimensions");
  }
  char header[64];
  int n = std::snprintf(header, sizeof(header), "P5\n%zu %zu\n255\n", img.width,
                        img.height);
  Bytes out(header, header + n);
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

namespace {

// Skips whitespace and '#' comments, then reads an unsigned decimal.
size_t read_pgm_int(const Bytes& data, size_t& pos) {
  for (;;) {
    while (pos < data.size() && std::isspace(data[pos])) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= data.size() || !std::isdigit(data[pos])) {
    throw Error(Errc::parse_error, "malformed pgm header");
  }
  size_t value = 0;
  while (pos < data.size() && std::isdigit(data[pos])) {
    value = value * 10 + size_t(data[pos] - '0');
    if (value > 0xFFFFFFFF) throw Error(Errc::parse_error, "malformed pgm header");
    ++pos;
  }
  return value;
}

}  // namespace

GrayImage decode_pgm(const Bytes& data) {
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5') {
    throw Error(Errc::parse_error, "not a binary pgm (P5) file");
  }
  size_t pos = 2;
  size_t width = read_pgm_int(data, pos);
  size_t height = read_pgm_int(data, pos);
  size_t maxval = read_pgm_int(data, pos);
  if (width == 0 || height == 0) {
    throw Error(Errc::parse_error, "zero pgm dimension");
  }
  if (maxval == 0 || maxval > 255) {
    throw Error(Errc::parse_error, "unsupported pgm maxval");
  }
  if (pos >= data.size() || !std::isspace(data[pos])) {
    throw Error(Errc::parse_error, "malformed pgm header");
  }
  ++pos;  // single whitespace byte before the raster
  size_t need = width * height;
  if (data.size() - pos != need) {
    throw Error(Errc::parse_error, "pgm raster size mismatch");
  }
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(data.begin() + long(pos), data.end());
  return img;
}

GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(data);
}

void save_pgm(const GrayImage& img, const std::string& path) {
  Bytes data = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open " + path);
  out.write(reinterpret_cast<const char*>(data.data()), long(data.size()));
  if (!out) throw Error(Errc::io_error, "write failed for " + path);
}

}  // namespace slh
