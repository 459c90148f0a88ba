#pragma once

#include "slh/sha256.hpp"

namespace slh {

// RFC 2104 HMAC over SHA-256.
Digest256 hmac_sha256(const uint8_t* key, size_t key_len, const uint8_t* msg, size_t msg_len);
Digest256 hmac_sha256(const Bytes& key, const Bytes& msg);

// RFC 5869 extract-then-expand with SHA-256.
Digest256 hkdf_extract(const Bytes& salt, const Bytes& ikm);
Bytes hkdf_expand(const Digest256& prk, const Bytes& info, size_t out_len);
Bytes hkdf_sha256(const Bytes& salt, const Bytes& ikm, const Bytes& info, size_t out_len);

}  // namespace slh
