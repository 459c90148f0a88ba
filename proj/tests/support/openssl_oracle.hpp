// Independent reference implementations used as test oracles. Everything in
// here goes through OpenSSL so the library's own primitives are checked
// against code that shares none of their structure.
#pragma once

#include <slh/common.hpp>

#if SLH_HAVE_OPENSSL
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>

namespace oracle {

inline slh::Digest256 sha256(const uint8_t* data, size_t len) {
  slh::Digest256 out;
  unsigned int out_len = 0;
  EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr);
  return out;
}

inline slh::Digest256 sha256(const slh::Bytes& b) { return sha256(b.data(), b.size()); }

inline slh::Digest256 hmac_sha256(const slh::Bytes& key, const slh::Bytes& msg) {
  slh::Digest256 out;
  unsigned int out_len = 0;
  HMAC(EVP_sha256(), key.data(), int(key.size()), msg.data(), msg.size(), out.data(), &out_len);
  return out;
}

inline slh::Bytes hkdf_sha256(const slh::Bytes& salt, const slh::Bytes& ikm,
                              const slh::Bytes& info, size_t out_len) {
  slh::Bytes out(out_len);
  EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr);
  EVP_PKEY_derive_init(ctx);
  EVP_PKEY_CTX_set_hkdf_md(ctx, EVP_sha256());
  EVP_PKEY_CTX_set1_hkdf_salt(ctx, salt.data(), int(salt.size()));
  EVP_PKEY_CTX_set1_hkdf_key(ctx, ikm.data(), int(ikm.size()));
  EVP_PKEY_CTX_add1_hkdf_info(ctx, info.data(), int(info.size()));
  size_t len = out_len;
  EVP_PKEY_derive(ctx, out.data(), &len);
  EVP_PKEY_CTX_free(ctx);
  out.resize(len);
  return out;
}

}  // namespace oracle
#endif
