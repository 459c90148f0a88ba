#include "slh/record.hpp"

namespace slh {

const char* to_string(RecordType t) {
  switch (t) {
    case RecordType::visit: return "visit";
    case RecordType::prescription: return "prescription";
    case RecordType::lab: return "lab";
    case RecordType::image_ref: return "image_ref";
    case RecordType::vaccination: return "vaccination";
    case RecordType::referral: return "referral";
  }
  return "unknown";
}

RecordType record_type_from_string(std::string_view s) {
  for (uint8_t i = 0; i <= uint8_t(RecordType::referral); ++i) {
    if (s == to_string(RecordType(i))) return RecordType(i);
  }
  throw Error(Errc::parse_error, "unknown record type: " + std::string(s));
}

Bytes encode_record(const HealthRecord& r) {
  if (r.payload.size() > kMaxPayload) throw Error(Errc::bad_argument, "payload exceeds 64 KiB");
  if (uint8_t(r.record_type) > uint8_t(RecordType::referral)) {
    throw Error(Errc::bad_argument, "invalid record type");
  }
  Bytes out;
  out.reserve(kRecordPrefixSize + 4 + r.payload.size());
  out.insert(out.end(), r.record_id.begin(), r.record_id.end());
  out.insert(out.end(), r.patient_pseudonym.begin(), r.patient_pseudonym.end());
  out.insert(out.end(), r.facility_id.begin(), r.facility_id.end());
  out.push_back(uint8_t(r.record_type));
  put_u64be(out, r.created_at);
  out.push_back(r.flags);
  put_u16be(out, r.patient_birth_year);
  put_u32be(out, uint32_t(r.payload.size()));
  out.insert(out.end(), r.payload.begin(), r.payload.end());
  return out;
}

HealthRecord decode_record(ByteReader& reader) {
  HealthRecord r;
  r.record_id = reader.bytes<16>();
  r.patient_pseudonym = reader.bytes<32>();
  r.facility_id = reader.bytes<8>();
  uint8_t type = reader.u8();
  if (type > uint8_t(RecordType::referral)) throw Error(Errc::parse_error, "invalid record type");
  r.record_type = RecordType(type);
  r.created_at = reader.u64be();
  r.flags = reader.u8();
  r.patient_birth_year = reader.u16be();
  uint32_t len = reader.u32be();
  if (len > kMaxPayload) throw Error(Errc::parse_error, "payload length exceeds 64 KiB");
  r.payload = reader.blob(len);
  return r;
}

HealthRecord decode_record(const Bytes& encoded) {
  ByteReader reader(encoded);
  HealthRecord r = decode_record(reader);
  reader.expect_end("record");
  return r;
}

Digest256 leaf_hash(const HealthRecord& record) {
  Bytes buf;
  buf.push_back(0x00);
  Bytes enc = encode_record(record);
  buf.insert(buf.end(), enc.begin(), enc.end());
  return sha256d(buf);
}

RecordId record_id_from_hex(std::string_view hex) {
  Bytes raw = from_hex(hex);
  if (raw.size() != 16) throw Error(Errc::parse_error, "record id must be 16 bytes");
  RecordId id;
  std::memcpy(id.data(), raw.data(), 16);
  return id;
}

Pseudonym pseudonym_from_hex(std::string_view hex) {
  Bytes raw = from_hex(hex);
  if (raw.size() != 32) throw Error(Errc::parse_error, "pseudonym must be 32 bytes");
  Pseudonym p;
  std::memcpy(p.data(), raw.data(), 32);
  return p;
}

FacilityId facility_id_from_string(std::string_view s) {
  if (s.size() > 8) throw Error(Errc::parse_error, "facility id must be at most 8 bytes");
  FacilityId id{};
  std::memcpy(id.data(), s.data(), s.size());
  return id;
}

}  // namespace slh
