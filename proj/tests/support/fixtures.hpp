// Shared builders for deterministic test objects.
#pragma once

#include <slh/ledger.hpp>
#include <slh/proof.hpp>
#include <slh/rng.hpp>

namespace testsupport {

inline slh::DeviceProfile make_device(uint64_t id, uint8_t secret_fill = 0x42) {
  slh::DeviceProfile dev;
  dev.device_id = slh::device_id_from_u64(id);
  dev.device_secret.fill(secret_fill);
  dev.nominal_hashrate = 5000.0;
  dev.power_watts = 13.0;
  dev.tier = 1;
  return dev;
}

inline slh::RecordId make_record_id(uint64_t n) {
  slh::RecordId id{};
  for (int i = 0; i < 8; ++i) id[8 + i] = uint8_t(n >> (56 - 8 * i));
  return id;
}

inline slh::HealthRecord make_record(uint64_t n, slh::FacilityId facility = {}) {
  slh::HealthRecord r;
  r.record_id = make_record_id(n);
  r.patient_pseudonym.fill(uint8_t(n % 251));
  r.facility_id = facility;
  r.record_type = slh::RecordType(n % 6);
  r.created_at = 1700000000 + n * 60;
  r.flags = 0;
  r.patient_birth_year = uint16_t(1950 + n % 70);
  r.payload = {uint8_t('r'), uint8_t(n), uint8_t(n >> 8)};
  return r;
}

// Proof at trivial difficulty: one hash, instantly valid.
inline slh::DhfProof sign_record(const slh::HealthRecord& record, const slh::DeviceProfile& dev,
                                 uint64_t now = 0, slh::Difficulty diff = {1, 1}) {
  slh::DetRng rng(record.record_id[15] + 1);
  auto [proof, timing] =
      slh::generate_proof(dev, slh::leaf_hash(record), diff, now ? now : record.created_at, rng);
  return proof;
}

}  // namespace testsupport
