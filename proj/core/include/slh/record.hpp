#pragma once

#include "slh/sha256.hpp"

namespace slh {

using RecordId = std::array<uint8_t, 16>;
using Pseudonym = std::array<uint8_t, 32>;
using FacilityId = std::array<uint8_t, 8>;

enum class RecordType : uint8_t {
  visit = 0,
  prescription = 1,
  lab = 2,
  image_ref = 3,
  vaccination = 4,
  referral = 5,
};

const char* to_string(RecordType t);
RecordType record_type_from_string(std::string_view s);

constexpr uint8_t kFlagEmergency = 0x01;
constexpr uint8_t kFlagReferralPending = 0x02;
constexpr size_t kMaxPayload = 64 * 1024;

// One health record. Canonical encoding (fixed order, big-endian):
//   record_id(16) ∥ patient_pseudonym(32) ∥ facility_id(8) ∥ record_type(1)
//   ∥ created_at(8) ∥ flags(1) ∥ patient_birth_year(2) ∥ payload_len(4)
//   ∥ payload
// 72 bytes for an empty payload. Two records are equal iff their canonical
// encodings are byte-equal.
struct HealthRecord {
  RecordId record_id{};
  Pseudonym patient_pseudonym{};
  FacilityId facility_id{};
  RecordType record_type = RecordType::visit;
  uint64_t created_at = 0;
  uint8_t flags = 0;
  uint16_t patient_birth_year = 0;
  Bytes payload;

  bool emergency() const { return flags & kFlagEmergency; }
  bool referral_pending() const { return flags & kFlagReferralPending; }

  bool operator==(const HealthRecord&) const = default;
};

constexpr size_t kRecordPrefixSize = 16 + 32 + 8 + 1 + 8 + 1 + 2;  // 68, before the length field

Bytes encode_record(const HealthRecord& record);           // throws on oversize payload
HealthRecord decode_record(const Bytes& encoded);
HealthRecord decode_record(ByteReader& reader);            // for streams of records

// sha256d(0x00 ∥ canonical encoding). The 0x00 prefix keeps leaves and
// interior nodes in disjoint hash domains.
Digest256 leaf_hash(const HealthRecord& record);

RecordId record_id_from_hex(std::string_view hex);
Pseudonym pseudonym_from_hex(std::string_view hex);
FacilityId facility_id_from_string(std::string_view s);    // ≤ 8 chars, zero padded

}  // namespace slh
