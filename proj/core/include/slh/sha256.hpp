#pragma once

#include "slh/common.hpp"

namespace slh {

// Portable FIPS 180-4 SHA-256. Software only: the difficulty calibration in
// the proof scheme assumes commodity-CPU hash rates, so no hardware digest
// instructions or midstate shortcuts are used anywhere in the library.
class Sha256 {
 public:
  Sha256() { reset(); }

  void reset();
  void update(const uint8_t* data, size_t len);
  void update(const Bytes& b) { update(b.data(), b.size()); }
  void update(std::string_view s) { update(reinterpret_cast<const uint8_t*>(s.data()), s.size()); }
  Digest256 finish();

 private:
  void compress(const uint8_t* block);

  uint32_t state_[8];
  uint8_t buf_[64];
  size_t buf_len_;
  uint64_t total_len_;
};

Digest256 sha256(const uint8_t* data, size_t len);
Digest256 sha256(const Bytes& b);
Digest256 sha256(std::string_view s);

// Double SHA-256: sha256(sha256(data)). Used for all ledger tree nodes and
// proof hashes.
Digest256 sha256d(const uint8_t* data, size_t len);
Digest256 sha256d(const Bytes& b);

}  // namespace slh
