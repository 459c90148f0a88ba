#include "slh/rng.hpp"

#include "slh/sha256.hpp"

#include <cmath>

namespace slh {

uint64_t DetRng::below(uint64_t bound) {
  if (bound == 0) throw Error(Errc::bad_argument, "bound must be positive");
  uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    uint64_t r = engine_();
    if (r >= threshold) return r % bound;
  }
}

int64_t DetRng::between(int64_t lo, int64_t hi) {
  if (lo > hi) throw Error(Errc::bad_argument, "between: lo > hi");
  uint64_t span = uint64_t(hi) - uint64_t(lo) + 1;
  return span == 0 ? int64_t(u64()) : lo + int64_t(below(span));
}

double DetRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = real01();
  } while (u1 <= 0.0);
  u2 = real01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Bytes DetRng::bytes(size_t n) {
  Bytes out;
  out.reserve(n);
  while (out.size() < n) {
    uint64_t v = engine_();
    for (int i = 0; i < 8 && out.size() < n; ++i) {
      out.push_back(uint8_t(v >> (8 * i)));
    }
  }
  return out;
}

DetRng DetRng::substream(std::string_view label) const {
  Bytes material;
  put_u64be(material, seed_);
  material.insert(material.end(), label.begin(), label.end());
  Digest256 h = sha256(material);
  return DetRng(get_u64be(h.data()));
}

}  // namespace slh
