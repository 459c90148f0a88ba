#include "slh/session.hpp"

namespace slh {

std::array<uint8_t, AuthTag::kWireSize> AuthTag::serialize() const {
  std::array<uint8_t, kWireSize> out;
  Bytes buf;
  buf.reserve(kWireSize);
  put_u64be(buf, window_start);
  buf.insert(buf.end(), nonce.begin(), nonce.end());
  buf.insert(buf.end(), tag.begin(), tag.end());
  std::memcpy(out.data(), buf.data(), kWireSize);
  return out;
}

AuthTag AuthTag::deserialize(const uint8_t* wire, size_t len) {
  if (len != kWireSize) throw Error(Errc::parse_error, "auth tag must be 56 bytes");
  ByteReader r(wire, len);
  AuthTag t;
  t.window_start = r.u64be();
  t.nonce = r.bytes<16>();
  t.tag = r.bytes<32>();
  return t;
}

SessionKey derive_session_key(const Digest256& device_secret, uint64_t window_start,
                              const SessionNonce& nonce, uint64_t ttl_seconds) {
  Bytes salt;
  salt.reserve(24);
  put_u64be(salt, window_start);
  salt.insert(salt.end(), nonce.begin(), nonce.end());

  Bytes ikm(device_secret.begin(), device_secret.end());
  Bytes info(kSessionInfo.begin(), kSessionInfo.end());
  Bytes okm = hkdf_sha256(salt, ikm, info, 32);

  SessionKey key;
  std::memcpy(key.key.data(), okm.data(), 32);
  key.window_start = window_start;
  key.ttl_seconds = ttl_seconds;
  key.nonce = nonce;
  return key;
}

AuthTag sign_transaction(const SessionKey& key, const Bytes& message, uint64_t now) {
  if (!key.valid_at(now)) throw Error(Errc::verification_failed, "expired-key");
  AuthTag tag;
  tag.window_start = key.window_start;
  tag.nonce = key.nonce;
  tag.tag = hmac_sha256(key.key.data(), key.key.size(), message.data(), message.size());
  return tag;
}

const char* to_string(TagVerdict v) {
  switch (v) {
    case TagVerdict::ok: return "ok";
    case TagVerdict::expired: return "expired";
    case TagVerdict::bad_tag: return "bad-tag";
    case TagVerdict::replayed: return "replayed";
  }
  return "unknown";
}

bool ReplayCache::check_and_insert(uint64_t window_start, const SessionNonce& nonce,
                                   const Digest256& message_digest) {
  std::lock_guard lock(mutex_);
  return seen_.insert({window_start, nonce, message_digest}).second;
}

void ReplayCache::evict_expired(uint64_t now, uint64_t ttl_seconds, uint64_t skew_seconds) {
  std::lock_guard lock(mutex_);
  uint64_t horizon = ttl_seconds + skew_seconds;
  for (auto it = seen_.begin(); it != seen_.end();) {
    uint64_t window_start = std::get<0>(*it);
    if (now >= horizon && window_start <= now - horizon) {
      it = seen_.erase(it);
    } else {
      ++it;
    }
  }
}

size_t ReplayCache::size() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

TagVerdict verify_transaction(const Digest256& device_secret, const Bytes& message,
                              const AuthTag& tag, uint64_t now, ReplayCache& cache,
                              uint64_t ttl_seconds, uint64_t skew_seconds) {
  if (now >= tag.window_start + ttl_seconds + skew_seconds) return TagVerdict::expired;

  SessionKey key = derive_session_key(device_secret, tag.window_start, tag.nonce, ttl_seconds);
  Digest256 expected =
      hmac_sha256(key.key.data(), key.key.size(), message.data(), message.size());
  if (!constant_time_equal(expected.data(), tag.tag.data(), 32)) return TagVerdict::bad_tag;

  if (!cache.check_and_insert(tag.window_start, tag.nonce, sha256(message))) {
    return TagVerdict::replayed;
  }
  return TagVerdict::ok;
}

}  // namespace slh
