#pragma once

#include "slh/merkle.hpp"
#include "slh/proof.hpp"
#include "slh/record.hpp"

#include <filesystem>
#include <map>

namespace slh {

// One edit event. Version numbers are per record_id and contiguous from 1;
// entry 1's previous_leaf is all zeros. Wire form is fixed 104 bytes:
// record_id(16) ∥ version(8) ∥ editor_device(8) ∥ edited_at(8) ∥
// previous_leaf(32) ∥ new_leaf(32).
struct AuditEntry {
  RecordId record_id{};
  uint64_t version = 0;
  DeviceId editor_device{};
  uint64_t edited_at = 0;
  Digest256 previous_leaf{};
  Digest256 new_leaf{};

  static constexpr size_t kWireSize = 104;
  Bytes serialize() const;
  static AuditEntry deserialize(const Bytes& wire);
};

// Conflict-resolution stamp: last write wins, ordered by edited_at then by
// editor device id so two concurrent edits resolve the same way everywhere.
struct LwwStamp {
  uint64_t edited_at = 0;
  DeviceId editor{};

  friend auto operator<=>(const LwwStamp&, const LwwStamp&) = default;
};

// Append-only per-facility record store. Leaf order is append order; an
// update replaces the record's leaf in place and extends the audit chain,
// so superseded content stays retrievable while the tree width tracks the
// number of distinct record ids.
class Ledger {
 public:
  Ledger(FacilityId facility, const DeviceRegistry* registry)
      : facility_(facility), registry_(registry) {}

  // Both mutators require the proof to verify over leaf_hash(record)
  // against the registry and return the new ledger root.
  Digest256 append_record(const HealthRecord& record, const DhfProof& proof);
  Digest256 update_record(const HealthRecord& record, const DhfProof& proof);

  const HealthRecord* find(const RecordId& id) const;
  const DhfProof* proof_for(const RecordId& id) const;
  std::vector<AuditEntry> history(const RecordId& id) const;
  std::vector<HealthRecord> versions(const RecordId& id) const;  // oldest first, incl. current
  LwwStamp lww_stamp(const RecordId& id) const;

  FacilityId facility() const { return facility_; }
  const DeviceRegistry* registry() const { return registry_; }
  size_t size() const { return slots_.size(); }
  bool contains(const RecordId& id) const { return index_.count(id) > 0; }

  // Root over current leaves in append order; all zeros while empty.
  Digest256 root() const;
  InclusionProof prove(const RecordId& id) const;
  const std::vector<AuditEntry>& audit_log() const { return audit_; }

  // Stable iteration in append order.
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& slot : slots_) f(slot.record, slot.proof);
  }

  // File format: "SLH1" magic ∥ facility_id(8) ∥ entries ∥ trailer, each
  // entry tag(1) ∥ length(4, BE) ∥ body. Tags: 0x01 record, 0x03 its proof,
  // 0x02 audit entry, 0xFF trailer carrying the root, which load()
  // recomputes and checks.
  void save(const std::filesystem::path& path) const;
  static Ledger load(const std::filesystem::path& path, const DeviceRegistry* registry);

  Bytes serialize() const;
  static Ledger deserialize(const Bytes& data, const DeviceRegistry* registry);

 private:
  struct Slot {
    HealthRecord record;
    DhfProof proof;
    Digest256 leaf{};
    std::vector<HealthRecord> superseded;  // oldest first
  };

  void journal_event(const HealthRecord& record, const DhfProof& proof, const AuditEntry& audit);
  void apply_event(const HealthRecord& record, const DhfProof& proof, const AuditEntry& audit);

  FacilityId facility_{};
  const DeviceRegistry* registry_ = nullptr;
  std::vector<Slot> slots_;
  std::map<RecordId, size_t> index_;
  std::vector<AuditEntry> audit_;
  MerkleTree tree_;
  Bytes journal_;
};

}  // namespace slh
