#pragma once

#include "slh/device.hpp"
#include "slh/rng.hpp"
#include "slh/work.hpp"

namespace slh {

// Hashed preimage of a proof. Serialization is fixed at 88 bytes:
// record_digest(32) ∥ device_id(8) ∥ device_commitment(32) ∥
// timestamp(8, BE) ∥ nonce(8, BE).
struct ProofHeader {
  Digest256 record_digest{};
  DeviceId device_id{};
  Digest256 device_commitment{};
  uint64_t timestamp = 0;
  uint64_t nonce = 0;

  static constexpr size_t kWireSize = 88;
  Bytes serialize() const;
  static ProofHeader deserialize(const Bytes& wire);
};

// A difficulty-parameterized proof binding a record digest to a device.
// Wire form is header(88) ∥ d(8, BE) ∥ scale(8, BE) ∥ proof_hash(32),
// 136 bytes total.
struct DhfProof {
  ProofHeader header;
  Difficulty difficulty;
  Digest256 proof_hash{};

  static constexpr size_t kWireSize = 136;
  Bytes serialize() const;
  static DhfProof deserialize(const Bytes& wire);
};

struct ProofTiming {
  uint64_t attempts = 0;
  double elapsed_seconds = 0.0;
  double energy_joules = 0.0;

  static ProofTiming from_rate(uint64_t attempts, double effective_hashrate, double power_watts) {
    ProofTiming t;
    t.attempts = attempts;
    t.elapsed_seconds = double(attempts) / effective_hashrate;
    t.energy_joules = power_watts * t.elapsed_seconds;
    return t;
  }

  static ProofTiming from_elapsed(uint64_t attempts, double elapsed_seconds, double power_watts) {
    ProofTiming t;
    t.attempts = attempts;
    t.elapsed_seconds = elapsed_seconds;
    t.energy_joules = power_watts * elapsed_seconds;
    return t;
  }

  double effective_hashrate() const {
    return elapsed_seconds > 0 ? double(attempts) / elapsed_seconds : 0.0;
  }
};

Digest256 device_commitment(const DeviceProfile& device, const Digest256& record_digest);

// Sequential nonce search from 0; deterministic for fixed inputs. The
// effective hashrate for timing is drawn once per call from
// Normal(nominal, nominal·cv) truncated positive.
std::pair<DhfProof, ProofTiming> generate_proof(const DeviceProfile& device,
                                                const Digest256& record_digest,
                                                Difficulty difficulty,
                                                uint64_t now,
                                                DetRng& rng);

enum class ProofVerdict {
  ok,
  stale_binding,      // header's record digest is not the expected one
  bad_hash,           // proof_hash does not recompute from the header
  insufficient_work,  // proof_hash not below the difficulty target
  unknown_device,     // device_id absent from the registry
  bad_commitment,     // commitment does not recompute from the registered secret
};

const char* to_string(ProofVerdict v);

// Checks run in the order the verdicts are declared; the first failure is
// reported.
ProofVerdict verify_proof(const DhfProof& proof,
                          const Digest256& expected_record,
                          const DeviceRegistry& registry);

}  // namespace slh
