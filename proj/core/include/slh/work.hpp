#pragma once

#include "slh/sha256.hpp"
#include "slh/uint256.hpp"

namespace slh {

// Difficulty of a proof. `scale` generalizes the fixed 2^32 nonce-space
// factor so small deployments (and tests) can run with proportionally less
// work; scale = 2^32 recovers the production model.
struct Difficulty {
  uint64_t d = 1;
  uint64_t scale = uint64_t(1) << 32;

  bool operator==(const Difficulty&) const = default;
};

// Threshold a proof hash must be strictly below. d·scale == 1 makes the
// target 2^256, which no 256-bit value reaches by comparison, so that case
// is carried as `all_pass`.
struct WorkTarget {
  Uint256 limit;
  bool all_pass = false;

  bool admits(const Digest256& digest) const {
    return all_pass || Uint256::from_digest(digest) < limit;
  }
};

// floor(2^256 / (d·scale)). Throws Error(bad_argument) when d or scale is
// zero; d·scale never exceeds 2^256 since both factors fit in 64 bits.
WorkTarget target_for(Difficulty diff);

// Expected number of hash evaluations before a success: d·scale. Attempt
// counts are geometric with p = 1/(d·scale).
double expected_attempts(Difficulty diff);

}  // namespace slh
