#include "slh/kdf.hpp"

namespace slh {

Digest256 hmac_sha256(const uint8_t* key, size_t key_len, const uint8_t* msg, size_t msg_len) {
  uint8_t block[64] = {0};
  if (key_len > 64) {
    Digest256 kh = sha256(key, key_len);
    std::memcpy(block, kh.data(), 32);
  } else {
    std::memcpy(block, key, key_len);
  }

  uint8_t ipad[64], opad[64];
  for (int i = 0; i < 64; ++i) {
    ipad[i] = block[i] ^ 0x36;
    opad[i] = block[i] ^ 0x5c;
  }

  Sha256 inner;
  inner.update(ipad, 64);
  inner.update(msg, msg_len);
  Digest256 inner_digest = inner.finish();

  Sha256 outer;
  outer.update(opad, 64);
  outer.update(inner_digest.data(), 32);
  return outer.finish();
}

Digest256 hmac_sha256(const Bytes& key, const Bytes& msg) {
  return hmac_sha256(key.data(), key.size(), msg.data(), msg.size());
}

Digest256 hkdf_extract(const Bytes& salt, const Bytes& ikm) {
  // RFC 5869: an absent salt is a hash-length string of zeros.
  if (salt.empty()) {
    uint8_t zeros[32] = {0};
    return hmac_sha256(zeros, 32, ikm.data(), ikm.size());
  }
  return hmac_sha256(salt, ikm);
}

Bytes hkdf_expand(const Digest256& prk, const Bytes& info, size_t out_len) {
  if (out_len > 255 * 32) throw Error(Errc::bad_argument, "hkdf output too long");
  Bytes okm;
  okm.reserve(out_len);
  Bytes t;
  uint8_t counter = 1;
  while (okm.size() < out_len) {
    Bytes block = t;
    block.insert(block.end(), info.begin(), info.end());
    block.push_back(counter++);
    Digest256 d = hmac_sha256(prk.data(), prk.size(), block.data(), block.size());
    t.assign(d.begin(), d.end());
    size_t take = std::min<size_t>(32, out_len - okm.size());
    okm.insert(okm.end(), t.begin(), t.begin() + take);
  }
  return okm;
}

Bytes hkdf_sha256(const Bytes& salt, const Bytes& ikm, const Bytes& info, size_t out_len) {
  return hkdf_expand(hkdf_extract(salt, ikm), info, out_len);
}

}  // namespace slh
