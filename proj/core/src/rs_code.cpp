#include "slh/rs_code.hpp"

namespace slh {

namespace gf = gf256;

namespace {

// g(x) = Π_{i=0}^{31} (x - α^i), coefficients highest degree first,
// g[0] = 1.
struct Generator {
  uint8_t coef[kRsParity + 1];
};

Generator make_generator() {
  // Build lowest degree first by repeated multiplication with (x - α^i),
  // then flip so coef[0] is the leading 1.
  uint8_t low[kRsParity + 1] = {1};
  size_t deg = 0;
  for (size_t i = 0; i < kRsParity; ++i) {
    uint8_t root = gf::alpha_pow(int(i));
    ++deg;
    low[deg] = 0;
    for (size_t j = deg; j > 0; --j) {
      low[j] = uint8_t(gf::mul(low[j], root) ^ low[j - 1]);
    }
    low[0] = gf::mul(low[0], root);
  }
  Generator out{};
  for (size_t i = 0; i <= kRsParity; ++i) out.coef[i] = low[kRsParity - i];
  return out;
}

const Generator& generator() {
  static const Generator g = make_generator();
  return g;
}

}  // namespace

RsBlock rs_encode(const RsData& data) {
  const Generator& g = generator();
  RsBlock out{};
  std::memcpy(out.data(), data.data(), kRsData);

  uint8_t parity[kRsParity] = {0};
  for (size_t i = 0; i < kRsData; ++i) {
    uint8_t feedback = uint8_t(data[i] ^ parity[0]);
    std::memmove(parity, parity + 1, kRsParity - 1);
    parity[kRsParity - 1] = 0;
    if (feedback != 0) {
      for (size_t j = 0; j < kRsParity; ++j) {
        parity[j] ^= gf::mul(g.coef[j + 1], feedback);
      }
    }
  }
  std::memcpy(out.data() + kRsData, parity, kRsParity);
  return out;
}

Bytes rs_encode(const Bytes& data) {
  if (data.size() != kRsData) throw Error(Errc::bad_argument, "rs_encode needs 96 bytes");
  RsData d;
  std::memcpy(d.data(), data.data(), kRsData);
  RsBlock block = rs_encode(d);
  return Bytes(block.begin(), block.end());
}

namespace {

// S_j = r(α^j) with r(x) = Σ r[i]·x^(127-i). Returns true if any syndrome
// is nonzero.
bool syndromes(const uint8_t* r, uint8_t* s_out) {
  bool any = false;
  for (size_t j = 0; j < 2 * kRsT; ++j) {
    uint8_t a = gf::alpha_pow(int(j));
    uint8_t s = 0;
    for (size_t i = 0; i < kRsBlock; ++i) s = uint8_t(gf::mul(s, a) ^ r[i]);
    s_out[j] = s;
    any |= (s != 0);
  }
  return any;
}

}  // namespace

std::optional<RsDecodeResult> rs_decode(const RsBlock& block) {
  uint8_t s[2 * kRsT];
  RsDecodeResult result;
  if (!syndromes(block.data(), s)) {
    std::memcpy(result.data.data(), block.data(), kRsData);
    result.corrected = 0;
    return result;
  }

  // Berlekamp-Massey over the 32 syndromes
  uint8_t lambda[2 * kRsT + 1] = {1};
  uint8_t prev[2 * kRsT + 1] = {1};
  size_t L = 0, m = 1;
  uint8_t b = 1;
  for (size_t n = 0; n < 2 * kRsT; ++n) {
    uint8_t d = s[n];
    for (size_t i = 1; i <= L; ++i) d ^= gf::mul(lambda[i], s[n - i]);
    if (d == 0) {
      ++m;
    } else if (2 * L <= n) {
      uint8_t t[2 * kRsT + 1];
      std::memcpy(t, lambda, sizeof t);
      uint8_t coef = gf::div(d, b);
      for (size_t i = 0; i + m <= 2 * kRsT; ++i) {
        lambda[i + m] ^= gf::mul(coef, prev[i]);
      }
      L = n + 1 - L;
      std::memcpy(prev, t, sizeof prev);
      b = d;
      m = 1;
    } else {
      uint8_t coef = gf::div(d, b);
      for (size_t i = 0; i + m <= 2 * kRsT; ++i) {
        lambda[i + m] ^= gf::mul(coef, prev[i]);
      }
      ++m;
    }
  }
  if (L > kRsT) return std::nullopt;

  // Chien search over all 255 candidate degrees; roots outside the
  // shortened block mean the locator is bogus.
  size_t error_degree[kRsT];
  size_t n_errors = 0;
  for (int degree = 0; degree < 255; ++degree) {
    // x = α^(-degree); Λ(x) = Σ λ_i x^i
    uint8_t x = gf::alpha_pow(-degree);
    uint8_t acc = 0;
    uint8_t xp = 1;
    for (size_t i = 0; i <= L; ++i) {
      acc ^= gf::mul(lambda[i], xp);
      xp = gf::mul(xp, x);
    }
    if (acc == 0) {
      if (degree >= int(kRsBlock)) return std::nullopt;
      if (n_errors == kRsT) return std::nullopt;
      error_degree[n_errors++] = size_t(degree);
    }
  }
  if (n_errors != L) return std::nullopt;

  // Ω(x) = S(x)·Λ(x) mod x^32
  uint8_t omega[2 * kRsT] = {0};
  for (size_t i = 0; i < 2 * kRsT; ++i) {
    uint8_t acc = 0;
    for (size_t j = 0; j <= std::min(i, L); ++j) acc ^= gf::mul(lambda[j], s[i - j]);
    omega[i] = acc;
  }

  RsBlock fixed = block;
  for (size_t e = 0; e < n_errors; ++e) {
    size_t degree = error_degree[e];
    uint8_t x_inv = gf::alpha_pow(-int(degree));  // X^-1 for locator X = α^degree

    uint8_t om = 0, xp = 1;
    for (size_t i = 0; i < 2 * kRsT; ++i) {
      om ^= gf::mul(omega[i], xp);
      xp = gf::mul(xp, x_inv);
    }

    // Λ'(x) keeps only odd-degree terms of Λ
    uint8_t lp = 0;
    xp = 1;
    for (size_t i = 1; i <= L; i += 2) {
      lp ^= gf::mul(lambda[i], xp);
      xp = gf::mul(xp, gf::mul(x_inv, x_inv));
    }
    if (lp == 0) return std::nullopt;

    uint8_t magnitude = gf::mul(gf::alpha_pow(int(degree)), gf::div(om, lp));
    if (magnitude == 0) return std::nullopt;
    fixed[kRsBlock - 1 - degree] ^= magnitude;
  }

  // a real decode leaves no residual syndrome
  uint8_t check[2 * kRsT];
  if (syndromes(fixed.data(), check)) return std::nullopt;

  std::memcpy(result.data.data(), fixed.data(), kRsData);
  result.corrected = int(n_errors);
  return result;
}

}  // namespace slh
