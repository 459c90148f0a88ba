#pragma once

#include "slh/ledger.hpp"

namespace slh {

constexpr uint8_t kSyncTreeDepth = 8;  // 256 buckets

// One record's entry in a sync bucket: enough to spot divergence and pick
// the last-write-wins side without shipping the record. Wire form 64 bytes:
// record_id(16) ∥ leaf(32) ∥ edited_at(8, BE) ∥ editor(8).
struct BucketEntry {
  RecordId record_id{};
  Digest256 leaf{};
  uint64_t edited_at = 0;
  DeviceId editor{};

  static constexpr size_t kWireSize = 64;
  LwwStamp stamp() const { return LwwStamp{edited_at, editor}; }

  bool operator==(const BucketEntry&) const = default;
};

// Content-addressed digest tree over a ledger's current records. Records
// hash into 2^depth buckets by record_id, so replicas holding the same
// record set reach the same root regardless of append order (the ledger's
// own tree is append-ordered and will not). Bucket digests cover the sorted
// (record_id, leaf) pairs under domain byte 0x02; interior nodes pair-hash
// under 0x03. Levels run 0 (root) through depth (buckets).
class SyncTree {
 public:
  static SyncTree build(const Ledger& ledger, uint8_t depth = kSyncTreeDepth);

  uint8_t depth() const { return depth_; }
  const Digest256& root() const { return levels_[0][0]; }
  const Digest256& node(uint8_t level, uint32_t index) const;
  const std::vector<BucketEntry>& bucket(uint32_t index) const;
  size_t record_count() const { return record_count_; }

  static uint32_t bucket_for(const RecordId& id, uint8_t depth);

 private:
  explicit SyncTree(uint8_t depth);

  uint8_t depth_ = 0;
  size_t record_count_ = 0;
  std::vector<std::vector<BucketEntry>> buckets_;  // sorted by record_id
  std::vector<std::vector<Digest256>> levels_;     // levels_[l].size() == 2^l
};

Digest256 bucket_digest(const std::vector<BucketEntry>& entries);

}  // namespace slh
