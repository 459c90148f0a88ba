#include "slh/sync_tree.hpp"

#include <algorithm>

namespace slh {

Digest256 bucket_digest(const std::vector<BucketEntry>& entries) {
  Bytes buf;
  buf.reserve(1 + entries.size() * 48);
  buf.push_back(0x02);
  for (const auto& e : entries) {
    buf.insert(buf.end(), e.record_id.begin(), e.record_id.end());
    buf.insert(buf.end(), e.leaf.begin(), e.leaf.end());
  }
  return sha256d(buf);
}

namespace {

Digest256 interior_digest(const Digest256& left, const Digest256& right) {
  uint8_t buf[65];
  buf[0] = 0x03;
  std::copy(left.begin(), left.end(), buf + 1);
  std::copy(right.begin(), right.end(), buf + 33);
  return sha256d(buf, sizeof(buf));
}

}  // namespace

SyncTree::SyncTree(uint8_t depth) : depth_(depth) {
  buckets_.resize(size_t(1) << depth);
  levels_.resize(depth + 1);
  for (uint8_t l = 0; l <= depth; ++l) levels_[l].resize(size_t(1) << l);
}

uint32_t SyncTree::bucket_for(const RecordId& id, uint8_t depth) {
  auto h = sha256(id.data(), id.size());
  return get_u32be(h.data()) >> (32 - depth);
}

SyncTree SyncTree::build(const Ledger& ledger, uint8_t depth) {
  if (depth < 1 || depth > 16) {
    throw Error(Errc::bad_argument, "sync tree depth out of range");
  }
  SyncTree tree(depth);
  ledger.for_each([&](const HealthRecord& rec, const DhfProof& proof) {
    BucketEntry e;
    e.record_id = rec.record_id;
    e.leaf = leaf_hash(rec);
    e.edited_at = proof.header.timestamp;
    e.editor = proof.header.device_id;
    tree.buckets_[bucket_for(rec.record_id, depth)].push_back(e);
    ++tree.record_count_;
  });
  for (size_t i = 0; i < tree.buckets_.size(); ++i) {
    auto& b = tree.buckets_[i];
    std::sort(b.begin(), b.end(), [](const BucketEntry& a, const BucketEntry& c) {
      return a.record_id < c.record_id;
    });
    tree.levels_[depth][i] = bucket_digest(b);
  }
  for (int l = depth - 1; l >= 0; --l) {
    for (size_t i = 0; i < tree.levels_[l].size(); ++i) {
      tree.levels_[l][i] =
          interior_digest(tree.levels_[l + 1][2 * i], tree.levels_[l + 1][2 * i + 1]);
    }
  }
  return tree;
}

const Digest256& SyncTree::node(uint8_t level, uint32_t index) const {
  if (level > depth_ || index >= levels_[level].size()) {
    throw Error(Errc::bad_argument, "sync tree node out of range");
  }
  return levels_[level][index];
}

const std::vector<BucketEntry>& SyncTree::bucket(uint32_t index) const {
  if (index >= buckets_.size()) {
    throw Error(Errc::bad_argument, "sync tree bucket out of range");
  }
  return buckets_[index];
}

}  // namespace slh
