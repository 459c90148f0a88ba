#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slh {

using Bytes = std::vector<uint8_t>;
using Digest256 = std::array<uint8_t, 32>;

// Error codes shared across the library; the CLI maps them onto exit codes.
enum class Errc {
  bad_argument,
  parse_error,
  io_error,
  corruption,
  verification_failed,
  tier_violation,
  protocol_error,
  not_found,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

std::string to_hex(const uint8_t* data, size_t len);
std::string to_hex(const Bytes& b);
std::string to_hex(const Digest256& d);
Bytes from_hex(std::string_view hex);  // throws Error(parse_error) on bad input

inline void put_u16be(Bytes& out, uint16_t v) {
  out.push_back(uint8_t(v >> 8));
  out.push_back(uint8_t(v));
}

inline void put_u32be(Bytes& out, uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline void put_u64be(Bytes& out, uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(uint8_t(v >> (8 * i)));
}

inline uint16_t get_u16be(const uint8_t* p) {
  return uint16_t(uint16_t(p[0]) << 8 | p[1]);
}

inline uint32_t get_u32be(const uint8_t* p) {
  return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 | p[3];
}

inline uint64_t get_u64be(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | p[i];
  return v;
}

// Cursor for decoding length-checked binary structures.
class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t len) : p_(data), end_(data + len) {}
  explicit ByteReader(const Bytes& b) : ByteReader(b.data(), b.size()) {}

  size_t remaining() const { return size_t(end_ - p_); }

  const uint8_t* take(size_t n) {
    if (remaining() < n) throw Error(Errc::parse_error, "truncated input");
    const uint8_t* q = p_;
    p_ += n;
    return q;
  }

  uint8_t u8() { return *take(1); }
  uint16_t u16be() { return get_u16be(take(2)); }
  uint32_t u32be() { return get_u32be(take(4)); }
  uint64_t u64be() { return get_u64be(take(8)); }

  template <size_t N>
  std::array<uint8_t, N> bytes() {
    std::array<uint8_t, N> out;
    std::memcpy(out.data(), take(N), N);
    return out;
  }

  Bytes blob(size_t n) {
    const uint8_t* q = take(n);
    return Bytes(q, q + n);
  }

  void expect_end(const char* what) const {
    if (p_ != end_) throw Error(Errc::parse_error, std::string("trailing bytes in ") + what);
  }

 private:
  const uint8_t* p_;
  const uint8_t* end_;
};

bool constant_time_equal(const uint8_t* a, const uint8_t* b, size_t len);

}  // namespace slh
