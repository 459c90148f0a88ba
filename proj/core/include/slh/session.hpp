#pragma once

#include "slh/device.hpp"
#include "slh/kdf.hpp"

#include <mutex>
#include <set>

namespace slh {

// Protocol label fed to the key derivation as the HKDF info string.
inline constexpr std::string_view kSessionInfo = "SiliconHealth-v1";
constexpr uint64_t kSessionTtlSeconds = 30;
constexpr uint64_t kClockSkewSeconds = 5;

using SessionNonce = std::array<uint8_t, 16>;

// Ephemeral key for one 30-second window. Valid for signing while
// now ∈ [window_start, window_start + ttl).
struct SessionKey {
  Digest256 key{};
  DeviceId device_id{};
  uint64_t window_start = 0;
  uint64_t ttl_seconds = kSessionTtlSeconds;
  SessionNonce nonce{};  // derivation nonce, echoed into every tag

  bool valid_at(uint64_t now) const {
    return now >= window_start && now < window_start + ttl_seconds;
  }
};

// Wire form: window_start(8, BE) ∥ nonce(16) ∥ tag(32) = 56 bytes.
struct AuthTag {
  Digest256 tag{};
  uint64_t window_start = 0;
  SessionNonce nonce{};

  static constexpr size_t kWireSize = 56;
  std::array<uint8_t, kWireSize> serialize() const;
  static AuthTag deserialize(const uint8_t* wire, size_t len);
};

// HKDF(ikm = device_secret, salt = window_start(8, BE) ∥ nonce(16),
// info = "SiliconHealth-v1"), 32-byte output.
SessionKey derive_session_key(const Digest256& device_secret, uint64_t window_start,
                              const SessionNonce& nonce,
                              uint64_t ttl_seconds = kSessionTtlSeconds);

// Tags signed outside the key window raise Error(verification_failed,
// "expired-key").
AuthTag sign_transaction(const SessionKey& key, const Bytes& message, uint64_t now);

enum class TagVerdict { ok, expired, bad_tag, replayed };
const char* to_string(TagVerdict v);

// Seen-tag memory for one verifier. check_and_insert is atomic: when two
// threads present the same triple concurrently, exactly one wins.
class ReplayCache {
 public:
  bool check_and_insert(uint64_t window_start, const SessionNonce& nonce,
                        const Digest256& message_digest);
  // Entries whose window closed more than ttl + skew before `now` can never
  // verify again, so dropping them is safe.
  void evict_expired(uint64_t now, uint64_t ttl_seconds = kSessionTtlSeconds,
                     uint64_t skew_seconds = kClockSkewSeconds);
  size_t size() const;

 private:
  using Key = std::tuple<uint64_t, SessionNonce, Digest256>;
  mutable std::mutex mutex_;
  std::set<Key> seen_;
};

// Re-derives the key from the tag's window metadata and accepts iff the
// HMAC matches, `now` is inside the window plus clock-skew allowance, and
// the (window, nonce, message digest) triple has not been seen before.
// Acceptance records the triple in the cache.
TagVerdict verify_transaction(const Digest256& device_secret, const Bytes& message,
                              const AuthTag& tag, uint64_t now, ReplayCache& cache,
                              uint64_t ttl_seconds = kSessionTtlSeconds,
                              uint64_t skew_seconds = kClockSkewSeconds);

}  // namespace slh
