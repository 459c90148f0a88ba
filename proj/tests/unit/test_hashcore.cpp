#include <doctest.h>

#include <slh/rng.hpp>
#include <slh/sha256.hpp>
#include <slh/uint256.hpp>
#include <slh/work.hpp>

#include "support/openssl_oracle.hpp"

using namespace slh;

TEST_CASE("sha256 FIPS 180-4 vectors") {
  CHECK(to_hex(sha256("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(to_hex(sha256("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(to_hex(sha256("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");

  std::string million_a(1000000, 'a');
  CHECK(to_hex(sha256(million_a)) ==
        "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("sha256d composes sha256 twice") {
  CHECK(to_hex(sha256d(Bytes{})) ==
        "5df6e0e2761359d30a8275058e299fcc0381534545f55cf43e41983f5d4c9456");
  Bytes abc{'a', 'b', 'c'};
  CHECK(to_hex(sha256d(abc)) ==
        "4f8b42c22dd3729b519ba6f68d2da7cc5b2d606d05daed5ad5128cc03e6c6358");
  Digest256 inner = sha256(abc);
  CHECK(sha256d(abc) == sha256(inner.data(), inner.size()));
}

TEST_CASE("streaming updates match one-shot hashing") {
  DetRng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    Bytes data = rng.bytes(rng.below(5000));
    Sha256 h;
    size_t pos = 0;
    while (pos < data.size()) {
      size_t chunk = std::min<size_t>(data.size() - pos, rng.below(257) + 1);
      h.update(data.data() + pos, chunk);
      pos += chunk;
    }
    CHECK(h.finish() == sha256(data));
  }
}

#if SLH_HAVE_OPENSSL
TEST_CASE("sha256 matches the independent reference on random inputs") {
  DetRng rng(202);
  for (int trial = 0; trial < 10000; ++trial) {
    Bytes data = rng.bytes(rng.below(4097));
    REQUIRE(sha256(data) == oracle::sha256(data));
  }
}
#endif

TEST_CASE("Uint256 ordering and digest round-trip") {
  DetRng rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    Bytes a = rng.bytes(32), b = rng.bytes(32);
    Digest256 da, db;
    std::memcpy(da.data(), a.data(), 32);
    std::memcpy(db.data(), b.data(), 32);
    Uint256 ua = Uint256::from_digest(da), ub = Uint256::from_digest(db);
    CHECK(ua.to_digest() == da);
    // big-endian byte order is integer order
    CHECK((ua < ub) == std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
  }
  CHECK(Uint256::zero() < Uint256::max());
  CHECK(Uint256::from_hex(std::string(64, '0')) == Uint256::zero());
}

TEST_CASE("target_for exact values") {
  auto hex_of = [](uint64_t d, uint64_t scale) { return target_for({d, scale}).limit.to_hex(); };

  // powers of two reduce to bit shifts of 2^256
  CHECK(hex_of(1, uint64_t(1) << 32) ==
        "0000000100000000000000000000000000000000000000000000000000000000");
  CHECK(hex_of(2, uint64_t(1) << 32) ==
        "0000000080000000000000000000000000000000000000000000000000000000");
  CHECK(hex_of(32768, uint64_t(1) << 32) ==
        "0000000000020000000000000000000000000000000000000000000000000000");

  // non-power-of-two divisors exercise the long division
  CHECK(hex_of(3, uint64_t(1) << 32) ==
        "0000000055555555555555555555555555555555555555555555555555555555");
  CHECK(hex_of(1000, 7) ==
        "00095cbec1aeaa46cd6298b8e7b77139a2f6585b4843e066fc325281510ad33c");

  CHECK(target_for({1, 1}).all_pass);
  CHECK_THROWS_AS(target_for({0, 1}), Error);
}

TEST_CASE("target_for strictly decreases with difficulty") {
  uint64_t scale = uint64_t(1) << 20;
  Uint256 prev = target_for({1, scale}).limit;
  for (uint64_t d : {2, 3, 5, 17, 1000, 65537, 1 << 30}) {
    Uint256 cur = target_for({d, scale}).limit;
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("expected_attempts is the difficulty product") {
  CHECK(expected_attempts({1, 1}) == 1.0);
  CHECK(expected_attempts({32768, uint64_t(1) << 32}) == doctest::Approx(140737488355328.0));
  CHECK(expected_attempts({1024, 1024}) == doctest::Approx(1048576.0));
}

TEST_CASE("fraction of digests below target converges to 1/(d*scale)") {
  // Chi-square goodness of fit with two bins at the 99.9% level.
  Difficulty diff{64, 64};  // p = 1/4096
  WorkTarget target = target_for(diff);

  const int n = 1 << 20;
  DetRng rng(404);
  int below = 0;
  Bytes buf(8);
  for (int i = 0; i < n; ++i) {
    uint64_t v = rng.u64();
    for (int b = 0; b < 8; ++b) buf[b] = uint8_t(v >> (8 * b));
    if (target.admits(sha256d(buf))) ++below;
  }

  double expect = double(n) / 4096.0;  // 256
  double chi2 = (below - expect) * (below - expect) / expect +
                (below - expect) * (below - expect) / (n - expect);
  CHECK(chi2 < 10.83);  // chi-square(1df) 0.999 quantile
}
