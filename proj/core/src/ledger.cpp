#include "slh/ledger.hpp"

#include <fstream>

namespace slh {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'H', '1'};
constexpr uint8_t kTagRecord = 0x01;
constexpr uint8_t kTagAudit = 0x02;
constexpr uint8_t kTagProof = 0x03;
constexpr uint8_t kTagTrailer = 0xFF;

void put_entry(Bytes& out, uint8_t tag, const Bytes& body) {
  out.push_back(tag);
  put_u32be(out, uint32_t(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

}  // namespace

Bytes AuditEntry::serialize() const {
  Bytes out;
  out.reserve(kWireSize);
  out.insert(out.end(), record_id.begin(), record_id.end());
  put_u64be(out, version);
  out.insert(out.end(), editor_device.begin(), editor_device.end());
  put_u64be(out, edited_at);
  out.insert(out.end(), previous_leaf.begin(), previous_leaf.end());
  out.insert(out.end(), new_leaf.begin(), new_leaf.end());
  return out;
}

AuditEntry AuditEntry::deserialize(const Bytes& wire) {
  ByteReader r(wire);
  AuditEntry e;
  e.record_id = r.bytes<16>();
  e.version = r.u64be();
  e.editor_device = r.bytes<8>();
  e.edited_at = r.u64be();
  e.previous_leaf = r.bytes<32>();
  e.new_leaf = r.bytes<32>();
  r.expect_end("audit entry");
  return e;
}

Digest256 Ledger::append_record(const HealthRecord& record, const DhfProof& proof) {
  if (index_.count(record.record_id)) {
    throw Error(Errc::bad_argument, "duplicate record id " + to_hex(record.record_id.data(), 16));
  }
  if (!registry_) throw Error(Errc::bad_argument, "ledger has no device registry");
  Digest256 leaf = leaf_hash(record);
  ProofVerdict verdict = verify_proof(proof, leaf, *registry_);
  if (verdict != ProofVerdict::ok) {
    throw Error(Errc::verification_failed, std::string("rejected proof: ") + to_string(verdict));
  }

  AuditEntry audit;
  audit.record_id = record.record_id;
  audit.version = 1;
  audit.editor_device = proof.header.device_id;
  audit.edited_at = proof.header.timestamp;
  audit.new_leaf = leaf;

  apply_event(record, proof, audit);
  journal_event(record, proof, audit);
  return root();
}

Digest256 Ledger::update_record(const HealthRecord& record, const DhfProof& proof) {
  auto it = index_.find(record.record_id);
  if (it == index_.end()) {
    throw Error(Errc::not_found, "unknown record id " + to_hex(record.record_id.data(), 16));
  }
  if (!registry_) throw Error(Errc::bad_argument, "ledger has no device registry");
  Digest256 leaf = leaf_hash(record);
  ProofVerdict verdict = verify_proof(proof, leaf, *registry_);
  if (verdict != ProofVerdict::ok) {
    throw Error(Errc::verification_failed, std::string("rejected proof: ") + to_string(verdict));
  }

  const Slot& slot = slots_[it->second];
  AuditEntry audit;
  audit.record_id = record.record_id;
  audit.version = uint64_t(slot.superseded.size()) + 2;
  audit.editor_device = proof.header.device_id;
  audit.edited_at = proof.header.timestamp;
  audit.previous_leaf = slot.leaf;
  audit.new_leaf = leaf;

  apply_event(record, proof, audit);
  journal_event(record, proof, audit);
  return root();
}

void Ledger::apply_event(const HealthRecord& record, const DhfProof& proof,
                         const AuditEntry& audit) {
  Digest256 leaf = leaf_hash(record);
  if (leaf != audit.new_leaf) throw Error(Errc::corruption, "audit entry does not match record");

  if (audit.version == 1) {
    if (index_.count(record.record_id)) {
      throw Error(Errc::corruption, "version 1 for an existing record id");
    }
    Slot slot;
    slot.record = record;
    slot.proof = proof;
    slot.leaf = leaf;
    index_[record.record_id] = slots_.size();
    slots_.push_back(std::move(slot));
    tree_.append(leaf);
  } else {
    auto it = index_.find(record.record_id);
    if (it == index_.end()) throw Error(Errc::corruption, "update for unknown record id");
    Slot& slot = slots_[it->second];
    if (audit.version != slot.superseded.size() + 2) {
      throw Error(Errc::corruption, "audit versions not contiguous");
    }
    if (audit.previous_leaf != slot.leaf) {
      throw Error(Errc::corruption, "audit previous leaf does not match");
    }
    slot.superseded.push_back(std::move(slot.record));
    slot.record = record;
    slot.proof = proof;
    slot.leaf = leaf;
    tree_.update(it->second, leaf);
  }
  audit_.push_back(audit);
}

void Ledger::journal_event(const HealthRecord& record, const DhfProof& proof,
                           const AuditEntry& audit) {
  put_entry(journal_, kTagRecord, encode_record(record));
  put_entry(journal_, kTagProof, proof.serialize());
  put_entry(journal_, kTagAudit, audit.serialize());
}

const HealthRecord* Ledger::find(const RecordId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &slots_[it->second].record;
}

const DhfProof* Ledger::proof_for(const RecordId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &slots_[it->second].proof;
}

std::vector<AuditEntry> Ledger::history(const RecordId& id) const {
  std::vector<AuditEntry> out;
  for (const auto& e : audit_) {
    if (e.record_id == id) out.push_back(e);
  }
  return out;
}

std::vector<HealthRecord> Ledger::versions(const RecordId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return {};
  std::vector<HealthRecord> out = slots_[it->second].superseded;
  out.push_back(slots_[it->second].record);
  return out;
}

LwwStamp Ledger::lww_stamp(const RecordId& id) const {
  LwwStamp stamp;
  for (const auto& e : audit_) {
    if (e.record_id == id) {
      stamp.edited_at = e.edited_at;
      stamp.editor = e.editor_device;
    }
  }
  return stamp;
}

Digest256 Ledger::root() const {
  if (slots_.empty()) return Digest256{};
  return tree_.root();
}

InclusionProof Ledger::prove(const RecordId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(Errc::not_found, "unknown record id");
  return tree_.prove(it->second);
}

Bytes Ledger::serialize() const {
  Bytes out;
  out.reserve(12 + journal_.size() + 37);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.insert(out.end(), facility_.begin(), facility_.end());
  out.insert(out.end(), journal_.begin(), journal_.end());
  Digest256 r = root();
  put_entry(out, kTagTrailer, Bytes(r.begin(), r.end()));
  return out;
}

Ledger Ledger::deserialize(const Bytes& data, const DeviceRegistry* registry) {
  ByteReader reader(data);
  const uint8_t* magic = reader.take(4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(Errc::corruption, "bad ledger magic");

  Ledger ledger({}, registry);
  ledger.facility_ = reader.bytes<8>();

  std::optional<HealthRecord> pending_record;
  std::optional<DhfProof> pending_proof;
  bool saw_trailer = false;
  Digest256 trailer_root{};

  while (reader.remaining() > 0) {
    if (saw_trailer) throw Error(Errc::corruption, "data after ledger trailer");
    uint8_t tag = reader.u8();
    uint32_t len = reader.u32be();
    Bytes body = reader.blob(len);
    switch (tag) {
      case kTagRecord:
        if (pending_record) throw Error(Errc::corruption, "record entry without audit entry");
        pending_record = decode_record(body);
        break;
      case kTagProof:
        if (!pending_record || pending_proof) {
          throw Error(Errc::corruption, "proof entry out of order");
        }
        pending_proof = DhfProof::deserialize(body);
        break;
      case kTagAudit: {
        if (!pending_record || !pending_proof) {
          throw Error(Errc::corruption, "audit entry without record and proof");
        }
        AuditEntry audit = AuditEntry::deserialize(body);
        ledger.apply_event(*pending_record, *pending_proof, audit);
        ledger.journal_event(*pending_record, *pending_proof, audit);
        pending_record.reset();
        pending_proof.reset();
        break;
      }
      case kTagTrailer: {
        if (pending_record || pending_proof) {
          throw Error(Errc::corruption, "truncated event before trailer");
        }
        if (body.size() != 32) throw Error(Errc::corruption, "bad trailer length");
        std::memcpy(trailer_root.data(), body.data(), 32);
        saw_trailer = true;
        break;
      }
      default:
        throw Error(Errc::corruption, "unknown ledger entry tag");
    }
  }
  if (!saw_trailer) throw Error(Errc::corruption, "ledger missing trailer");
  if (ledger.root() != trailer_root) {
    throw Error(Errc::corruption, "ledger root does not match trailer");
  }
  return ledger;
}

void Ledger::save(const std::filesystem::path& path) const {
  Bytes data = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
  if (!out) throw Error(Errc::io_error, "write failed: " + path.string());
}

Ledger Ledger::load(const std::filesystem::path& path, const DeviceRegistry* registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(data, registry);
}

}  // namespace slh
