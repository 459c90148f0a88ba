#include "slh/proof.hpp"

namespace slh {

Bytes ProofHeader::serialize() const {
  Bytes out;
  out.reserve(kWireSize);
  out.insert(out.end(), record_digest.begin(), record_digest.end());
  out.insert(out.end(), device_id.begin(), device_id.end());
  out.insert(out.end(), device_commitment.begin(), device_commitment.end());
  put_u64be(out, timestamp);
  put_u64be(out, nonce);
  return out;
}

ProofHeader ProofHeader::deserialize(const Bytes& wire) {
  ByteReader r(wire);
  ProofHeader h;
  h.record_digest = r.bytes<32>();
  h.device_id = r.bytes<8>();
  h.device_commitment = r.bytes<32>();
  h.timestamp = r.u64be();
  h.nonce = r.u64be();
  r.expect_end("proof header");
  return h;
}

Bytes DhfProof::serialize() const {
  Bytes out = header.serialize();
  out.reserve(kWireSize);
  put_u64be(out, difficulty.d);
  put_u64be(out, difficulty.scale);
  out.insert(out.end(), proof_hash.begin(), proof_hash.end());
  return out;
}

DhfProof DhfProof::deserialize(const Bytes& wire) {
  if (wire.size() != kWireSize) throw Error(Errc::parse_error, "proof must be 136 bytes");
  ByteReader r(wire);
  DhfProof p;
  Bytes hdr = r.blob(ProofHeader::kWireSize);
  p.header = ProofHeader::deserialize(hdr);
  p.difficulty.d = r.u64be();
  p.difficulty.scale = r.u64be();
  p.proof_hash = r.bytes<32>();
  r.expect_end("proof");
  return p;
}

Digest256 device_commitment(const DeviceProfile& device, const Digest256& record_digest) {
  Sha256 h;
  h.update(device.device_secret.data(), device.device_secret.size());
  h.update(record_digest.data(), record_digest.size());
  return h.finish();
}

std::pair<DhfProof, ProofTiming> generate_proof(const DeviceProfile& device,
                                                const Digest256& record_digest,
                                                Difficulty difficulty,
                                                uint64_t now,
                                                DetRng& rng) {
  WorkTarget target = target_for(difficulty);

  DhfProof proof;
  proof.header.record_digest = record_digest;
  proof.header.device_id = device.device_id;
  proof.header.device_commitment = device_commitment(device, record_digest);
  proof.header.timestamp = now;
  proof.difficulty = difficulty;

  // The serialized header only changes in its last 8 bytes as the nonce
  // advances, so build it once and patch in place.
  Bytes wire = proof.header.serialize();
  uint8_t* nonce_at = wire.data() + ProofHeader::kWireSize - 8;

  uint64_t nonce = 0;
  for (;;) {
    for (int i = 0; i < 8; ++i) nonce_at[i] = uint8_t(nonce >> (56 - 8 * i));
    Digest256 h = sha256d(wire.data(), wire.size());
    if (target.admits(h)) {
      proof.header.nonce = nonce;
      proof.proof_hash = h;
      break;
    }
    if (++nonce == 0) throw Error(Errc::verification_failed, "nonce space exhausted");
  }

  double effective = 0.0;
  do {
    effective = device.nominal_hashrate * (1.0 + device.hashrate_cv * rng.normal());
  } while (effective <= 0.0);

  return {proof, ProofTiming::from_rate(nonce + 1, effective, device.power_watts)};
}

const char* to_string(ProofVerdict v) {
  switch (v) {
    case ProofVerdict::ok: return "ok";
    case ProofVerdict::stale_binding: return "stale-binding";
    case ProofVerdict::bad_hash: return "bad-hash";
    case ProofVerdict::insufficient_work: return "insufficient-work";
    case ProofVerdict::unknown_device: return "unknown-device";
    case ProofVerdict::bad_commitment: return "bad-commitment";
  }
  return "unknown";
}

ProofVerdict verify_proof(const DhfProof& proof,
                          const Digest256& expected_record,
                          const DeviceRegistry& registry) {
  if (proof.header.record_digest != expected_record) return ProofVerdict::stale_binding;

  Bytes wire = proof.header.serialize();
  if (sha256d(wire.data(), wire.size()) != proof.proof_hash) return ProofVerdict::bad_hash;

  if (!target_for(proof.difficulty).admits(proof.proof_hash)) return ProofVerdict::insufficient_work;

  auto device = registry.find(proof.header.device_id);
  if (!device) return ProofVerdict::unknown_device;
  if (device_commitment(*device, proof.header.record_digest) != proof.header.device_commitment) {
    return ProofVerdict::bad_commitment;
  }
  return ProofVerdict::ok;
}

}  // namespace slh
