#pragma once

#include "slh/session.hpp"
#include "slh/sync_tree.hpp"

#include <functional>

namespace slh {

// Wire framing: kind(1) ∥ body_len(4, BE) ∥ body ∥ AuthTag(56). The tag is
// computed over kind ∥ body_len ∥ body with the sender's current session
// key; freshness is judged at the moment the first byte hits the wire, so a
// long transmission cannot expire its own tag in flight.
enum class SyncKind : uint8_t {
  root_hello = 1,       // body: sync tree root (exactly 32 bytes)
  branch_query = 2,     // body: level ∥ bitmap ∥ sender's digests or entries
  branch_reply = 3,     // body: level ∥ responder's digests or entries
  record_transfer = 4,  // body: encoded record ∥ proof(136)
  ack = 5,              // body: record_id(16)
  done = 6,             // body: final sync tree root (32 bytes)
};

const char* to_string(SyncKind kind);

struct SyncFrame {
  SyncKind kind = SyncKind::root_hello;
  Bytes body;
  AuthTag auth;

  Bytes serialize() const;
  static SyncFrame deserialize(const Bytes& wire);
};

constexpr size_t kSyncFrameOverhead = 5 + AuthTag::kWireSize;  // 61

// Read access to one side's digest tree, local or remote. plan_sync descends
// through these callbacks so the same planner runs against an in-memory tree
// or a wire-backed proxy.
struct TreeAccess {
  std::function<Digest256()> root;
  std::function<uint8_t()> depth;
  // digests of the given nodes at one level, in index order
  std::function<std::vector<Digest256>(uint8_t, const std::vector<uint32_t>&)> nodes;
  // bucket contents for the given bucket indices, in index order
  std::function<std::vector<std::vector<BucketEntry>>(const std::vector<uint32_t>&)>
      buckets;
};

TreeAccess tree_access(const SyncTree& tree);

// Transfer priority: emergency first, then pending referrals, then oldest
// created_at, then youngest patient, record_id bytes as the final tie-break.
bool sync_priority_less(const HealthRecord& a, const HealthRecord& b);

// Last-write-wins arbitration between two versions of one record.
// Returns 0 when the leaves are identical (no-op), -1 when the local
// version wins, +1 when the remote version wins. Ordered by
// (edited_at, editor device id), with the leaf bytes breaking the
// pathological equal-stamp case so both replicas agree.
int resolve_conflict(const LwwStamp& local_stamp, const Digest256& local_leaf,
                     const LwwStamp& remote_stamp, const Digest256& remote_leaf);

struct SyncPlan {
  std::vector<RecordId> transfers;  // to push, priority-ordered
  std::vector<RecordId> expected;   // peer should push, id-ordered
  size_t branch_queries = 0;        // level-batched queries issued

  size_t size() const { return transfers.size() + expected.size(); }
};

// Diffs the local ledger against a remote tree, descending only where
// digests differ. Throws Errc::protocol_error on a depth mismatch.
SyncPlan plan_sync(const Ledger& local, const TreeAccess& remote);

struct SyncEndpoint {
  Ledger* ledger = nullptr;
  const DeviceProfile* device = nullptr;    // signs this side's frames
  const DeviceRegistry* registry = nullptr; // verifies peer frames and proofs
  ReplayCache* replay = nullptr;
  std::vector<RecordId>* quarantine = nullptr;  // optional sink for bad records
};

struct LinkShape {
  uint32_t bits_per_second = 9600;
  double latency_seconds = 0.0;  // per frame, one way
  double loss_rate = 0.0;        // per-frame loss probability; loss aborts
};

struct SyncWindow {
  uint64_t open_at = 0;   // seconds
  uint64_t close_at = 0;
};

struct TranscriptEntry {
  bool from_initiator = false;
  Bytes wire;
};

struct SyncOptions {
  uint64_t rng_seed = 1;  // session nonces and loss draws; reuse within one
                          // key window would replay, so vary it per session
  size_t frame_limit = SIZE_MAX;  // scripted interruption after N frames
  std::vector<TranscriptEntry>* transcript = nullptr;
};

struct SyncReport {
  uint64_t bytes_sent = 0;      // initiator's perspective
  uint64_t bytes_received = 0;
  size_t records_transferred = 0;  // applied across both endpoints
  size_t rounds = 0;
  bool converged = false;
  double duration_seconds = 0.0;
  bool window_closed = false;  // budget or frame limit hit; progress kept
  bool aborted = false;        // auth failure or frame loss
  size_t quarantined = 0;
};

// Runs one bidirectional sync session between two in-process endpoints over
// a shaped link: root exchange, level-batched branch descent, prioritized
// record transfer with per-record proof verification, acknowledgements, and
// a final root confirmation. Progress is durable: an interrupted session
// leaves both ledgers valid, and the next session picks up from the
// remaining difference.
SyncReport run_sync(const SyncEndpoint& a, const SyncEndpoint& b,
                    const LinkShape& link, const SyncWindow& window,
                    const SyncOptions& opts = {});

}  // namespace slh
