#include "slh/sync.hpp"

#include "slh/rng.hpp"

#include <algorithm>
#include <map>
#include <optional>

namespace slh {

const char* to_string(SyncKind kind) {
  switch (kind) {
    case SyncKind::root_hello: return "root-hello";
    case SyncKind::branch_query: return "branch-query";
    case SyncKind::branch_reply: return "branch-reply";
    case SyncKind::record_transfer: return "record-transfer";
    case SyncKind::ack: return "ack";
    case SyncKind::done: return "done";
  }
  return "unknown";
}

Bytes SyncFrame::serialize() const {
  Bytes out;
  out.reserve(kSyncFrameOverhead + body.size());
  out.push_back(uint8_t(kind));
  put_u32be(out, uint32_t(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  auto tag = auth.serialize();
  out.insert(out.end(), tag.begin(), tag.end());
  return out;
}

SyncFrame SyncFrame::deserialize(const Bytes& wire) {
  ByteReader r(wire);
  SyncFrame f;
  uint8_t kind = r.u8();
  if (kind < 1 || kind > 6) throw Error(Errc::parse_error, "unknown sync frame kind");
  f.kind = SyncKind(kind);
  uint32_t len = r.u32be();
  f.body = r.blob(len);
  auto tag = r.take(AuthTag::kWireSize);
  f.auth = AuthTag::deserialize(tag, AuthTag::kWireSize);
  r.expect_end("sync frame");
  return f;
}

bool sync_priority_less(const HealthRecord& a, const HealthRecord& b) {
  if (a.emergency() != b.emergency()) return a.emergency();
  if (a.referral_pending() != b.referral_pending()) return a.referral_pending();
  if (a.created_at != b.created_at) return a.created_at < b.created_at;
  if (a.patient_birth_year != b.patient_birth_year) {
    return a.patient_birth_year > b.patient_birth_year;  // younger first
  }
  return a.record_id < b.record_id;
}

int resolve_conflict(const LwwStamp& local_stamp, const Digest256& local_leaf,
                     const LwwStamp& remote_stamp, const Digest256& remote_leaf) {
  if (local_leaf == remote_leaf) return 0;
  if (local_stamp != remote_stamp) return local_stamp < remote_stamp ? 1 : -1;
  return local_leaf < remote_leaf ? 1 : -1;
}

TreeAccess tree_access(const SyncTree& tree) {
  TreeAccess a;
  a.root = [&tree] { return tree.root(); };
  a.depth = [&tree] { return tree.depth(); };
  a.nodes = [&tree](uint8_t level, const std::vector<uint32_t>& idx) {
    std::vector<Digest256> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(tree.node(level, i));
    return out;
  };
  a.buckets = [&tree](const std::vector<uint32_t>& idx) {
    std::vector<std::vector<BucketEntry>> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(tree.bucket(i));
    return out;
  };
  return a;
}

namespace {

// Indices whose bit is set, MSB-first within each byte.
Bytes bitmap_bytes(const std::vector<uint32_t>& set, size_t nbits) {
  Bytes bm((nbits + 7) / 8, 0);
  for (auto i : set) bm[i >> 3] |= uint8_t(0x80u >> (i & 7));
  return bm;
}

std::vector<uint32_t> bitmap_indices(const uint8_t* p, size_t nbytes) {
  std::vector<uint32_t> out;
  for (size_t byte = 0; byte < nbytes; ++byte) {
    for (int bit = 0; bit < 8; ++bit) {
      if (p[byte] & (0x80u >> bit)) out.push_back(uint32_t(byte * 8 + bit));
    }
  }
  return out;
}

void put_entry(Bytes& out, const BucketEntry& e) {
  out.insert(out.end(), e.record_id.begin(), e.record_id.end());
  out.insert(out.end(), e.leaf.begin(), e.leaf.end());
  put_u64be(out, e.edited_at);
  out.insert(out.end(), e.editor.begin(), e.editor.end());
}

BucketEntry take_entry(ByteReader& r) {
  BucketEntry e;
  e.record_id = r.bytes<16>();
  e.leaf = r.bytes<32>();
  e.edited_at = r.u64be();
  e.editor = r.bytes<8>();
  return e;
}

void put_entry_lists(Bytes& out, const std::vector<std::vector<BucketEntry>>& lists) {
  for (const auto& list : lists) {
    if (list.size() > 0xFFFF) throw Error(Errc::protocol_error, "bucket too large");
    put_u16be(out, uint16_t(list.size()));
    for (const auto& e : list) put_entry(out, e);
  }
}

std::vector<std::vector<BucketEntry>> take_entry_lists(ByteReader& r, size_t count) {
  std::vector<std::vector<BucketEntry>> lists(count);
  for (size_t i = 0; i < count; ++i) {
    size_t n = r.u16be();
    lists[i].reserve(n);
    for (size_t j = 0; j < n; ++j) lists[i].push_back(take_entry(r));
  }
  return lists;
}

// Record ids this side should push / expect, from one bucket's two views.
void diff_bucket(const std::vector<BucketEntry>& mine,
                 const std::vector<BucketEntry>& theirs,
                 std::vector<RecordId>& push, std::vector<RecordId>& pull) {
  size_t i = 0, j = 0;
  while (i < mine.size() || j < theirs.size()) {
    if (j == theirs.size() ||
        (i < mine.size() && mine[i].record_id < theirs[j].record_id)) {
      push.push_back(mine[i++].record_id);
    } else if (i == mine.size() || theirs[j].record_id < mine[i].record_id) {
      pull.push_back(theirs[j++].record_id);
    } else {
      int w = resolve_conflict(mine[i].stamp(), mine[i].leaf, theirs[j].stamp(),
                               theirs[j].leaf);
      if (w < 0) push.push_back(mine[i].record_id);
      if (w > 0) pull.push_back(theirs[j].record_id);
      ++i, ++j;
    }
  }
}

void sort_by_priority(std::vector<RecordId>& ids, const Ledger& ledger) {
  std::sort(ids.begin(), ids.end(), [&](const RecordId& x, const RecordId& y) {
    return sync_priority_less(*ledger.find(x), *ledger.find(y));
  });
}

}  // namespace

SyncPlan plan_sync(const Ledger& local, const TreeAccess& remote) {
  SyncTree mine = SyncTree::build(local);
  if (remote.depth() != mine.depth()) {
    throw Error(Errc::protocol_error, "incompatible tree depth");
  }
  SyncPlan plan;
  if (remote.root() == mine.root()) return plan;

  uint8_t depth = mine.depth();
  std::vector<uint32_t> mismatched{0};
  std::vector<uint32_t> candidates;
  for (uint8_t level = 1; level <= depth && !mismatched.empty(); ++level) {
    std::vector<uint32_t> children;
    children.reserve(2 * mismatched.size());
    for (auto i : mismatched) {
      children.push_back(2 * i);
      children.push_back(2 * i + 1);
    }
    ++plan.branch_queries;
    if (level == depth) {
      candidates = children;
      break;
    }
    auto theirs = remote.nodes(level, children);
    std::vector<uint32_t> next;
    for (size_t k = 0; k < children.size(); ++k) {
      if (theirs[k] != mine.node(level, children[k])) next.push_back(children[k]);
    }
    mismatched = std::move(next);
  }

  auto peer = remote.buckets(candidates);
  for (size_t k = 0; k < candidates.size(); ++k) {
    diff_bucket(mine.bucket(candidates[k]), peer[k], plan.transfers, plan.expected);
  }
  sort_by_priority(plan.transfers, local);
  return plan;
}

namespace {

struct Side {
  const SyncEndpoint* ep = nullptr;
  uint64_t sent = 0;
  uint64_t received = 0;
  DetRng nonce_rng{0};
  std::map<uint64_t, SessionKey> keys;  // window_start -> key
  SyncTree tree;
  // per-session diff state
  std::vector<uint32_t> pending_children;
  std::vector<uint32_t> candidates;
  std::map<uint32_t, std::vector<BucketEntry>> peer_entries;
  std::vector<RecordId> plan;
  size_t applied = 0;

  Side(const SyncEndpoint& e, DetRng rng)
      : ep(&e), nonce_rng(rng), tree(SyncTree::build(*e.ledger)) {}

  const SessionKey& key_for(uint64_t now, uint64_t open_at) {
    uint64_t ws = open_at + (now - open_at) / kSessionTtlSeconds * kSessionTtlSeconds;
    auto it = keys.find(ws);
    if (it == keys.end()) {
      SessionNonce nonce{};
      Bytes nb = nonce_rng.bytes(nonce.size());
      std::copy(nb.begin(), nb.end(), nonce.begin());
      it = keys.emplace(ws, derive_session_key(ep->device->device_secret, ws, nonce))
               .first;
    }
    return it->second;
  }
};

struct Channel {
  const LinkShape* link;
  const SyncWindow* window;
  const SyncOptions* opts;
  DetRng loss_rng;
  double t;
  size_t frames = 0;
  size_t rounds = 0;
  size_t transferred = 0;
  size_t quarantined = 0;
  bool window_closed = false;
  bool aborted = false;

  bool halted() const { return window_closed || aborted; }
};

// Sends one authenticated frame; returns the decoded frame on delivery.
// Freshness for both signing and verification is the transmission start
// time: the tag of a frame that takes longer than one key window to
// transmit must not expire in flight.
std::optional<SyncFrame> send_frame(Channel& ch, Side& from, Side& to,
                                    bool from_initiator, SyncKind kind,
                                    Bytes body) {
  if (ch.halted()) return std::nullopt;
  if (ch.frames >= ch.opts->frame_limit) {
    ch.window_closed = true;
    return std::nullopt;
  }
  size_t wire_size = kSyncFrameOverhead + body.size();
  double tx = ch.link->latency_seconds +
              double(wire_size) * 8.0 / double(ch.link->bits_per_second);
  if (ch.t + tx > double(ch.window->close_at)) {
    ch.window_closed = true;
    return std::nullopt;
  }
  uint64_t start = uint64_t(ch.t);
  ch.t += tx;
  ++ch.frames;

  SyncFrame f;
  f.kind = kind;
  f.body = std::move(body);
  Bytes mac_input;
  mac_input.reserve(5 + f.body.size());
  mac_input.push_back(uint8_t(f.kind));
  put_u32be(mac_input, uint32_t(f.body.size()));
  mac_input.insert(mac_input.end(), f.body.begin(), f.body.end());
  f.auth = sign_transaction(from.key_for(start, ch.window->open_at), mac_input, start);

  Bytes wire = f.serialize();
  from.sent += wire.size();

  if (ch.loss_rng.chance(ch.link->loss_rate)) {
    ch.aborted = true;  // frame burned airtime but never arrived
    return std::nullopt;
  }

  to.received += wire.size();
  auto peer = to.ep->registry->find(from.ep->device->device_id);
  if (!peer ||
      verify_transaction(peer->device_secret, mac_input, f.auth, start,
                         *to.ep->replay) != TagVerdict::ok) {
    ch.aborted = true;
    return std::nullopt;
  }
  if (ch.opts->transcript != nullptr) {
    ch.opts->transcript->push_back({from_initiator, wire});
  }
  return f;
}

// Receiver-side handling of one record transfer; returns the ack body when
// the record was accepted (applied or already superseded locally).
std::optional<RecordId> receive_record(Channel& ch, Side& to, const Bytes& body) {
  ByteReader r(body);
  HealthRecord rec = decode_record(r);
  DhfProof proof = DhfProof::deserialize(r.blob(DhfProof::kWireSize));
  r.expect_end("record transfer");

  Digest256 leaf = leaf_hash(rec);
  if (verify_proof(proof, leaf, *to.ep->registry) != ProofVerdict::ok) {
    ++ch.quarantined;
    if (to.ep->quarantine != nullptr) to.ep->quarantine->push_back(rec.record_id);
    return std::nullopt;
  }

  Ledger& ledger = *to.ep->ledger;
  if (!ledger.contains(rec.record_id)) {
    ledger.append_record(rec, proof);
    ++to.applied;
    ++ch.transferred;
  } else {
    const HealthRecord* current = ledger.find(rec.record_id);
    LwwStamp incoming{proof.header.timestamp, proof.header.device_id};
    int w = resolve_conflict(ledger.lww_stamp(rec.record_id), leaf_hash(*current),
                             incoming, leaf);
    if (w > 0) {
      ledger.update_record(rec, proof);
      ++to.applied;
      ++ch.transferred;
    }
    // w <= 0: stale or identical push; ack so the peer moves on
  }
  return rec.record_id;
}

}  // namespace

SyncReport run_sync(const SyncEndpoint& a, const SyncEndpoint& b,
                    const LinkShape& link, const SyncWindow& window,
                    const SyncOptions& opts) {
  if (a.ledger == nullptr || a.device == nullptr || a.registry == nullptr ||
      a.replay == nullptr || b.ledger == nullptr || b.device == nullptr ||
      b.registry == nullptr || b.replay == nullptr) {
    throw Error(Errc::bad_argument, "sync endpoint not fully configured");
  }

  DetRng root_rng(opts.rng_seed);
  Side A(a, root_rng.substream("nonce-a"));
  Side B(b, root_rng.substream("nonce-b"));
  Channel ch{&link, &window, &opts, root_rng.substream("loss"),
             double(window.open_at)};

  SyncReport report;
  auto finish = [&]() {
    report.bytes_sent = A.sent;
    report.bytes_received = A.received;
    report.records_transferred = A.applied + B.applied;
    report.rounds = ch.rounds;
    report.duration_seconds = ch.t - double(window.open_at);
    report.window_closed = ch.window_closed;
    report.aborted = ch.aborted;
    report.quarantined = ch.quarantined;
    return report;
  };

  // root exchange
  auto hello_a = send_frame(ch, A, B, true, SyncKind::root_hello,
                            Bytes(A.tree.root().begin(), A.tree.root().end()));
  if (!hello_a) return finish();
  auto hello_b = send_frame(ch, B, A, false, SyncKind::root_hello,
                            Bytes(B.tree.root().begin(), B.tree.root().end()));
  if (!hello_b) return finish();
  ch.rounds = 1;
  if (hello_a->body == hello_b->body) {
    report.converged = true;
    return finish();
  }

  // level-batched descent; the last level ships bucket entries instead of
  // digests, so discovering the differing leaves costs depth query rounds
  uint8_t depth = A.tree.depth();
  A.pending_children = {0, 1};
  for (uint8_t level = 1; level <= depth; ++level) {
    const auto& children = A.pending_children;
    if (children.empty()) break;
    size_t nbits = size_t(1) << level;
    bool entries_level = level == depth;

    Bytes query;
    query.push_back(level);
    Bytes bm = bitmap_bytes(children, nbits);
    query.insert(query.end(), bm.begin(), bm.end());
    if (entries_level) {
      std::vector<std::vector<BucketEntry>> lists;
      lists.reserve(children.size());
      for (auto i : children) lists.push_back(A.tree.bucket(i));
      put_entry_lists(query, lists);
    } else {
      for (auto i : children) {
        const auto& d = A.tree.node(level, i);
        query.insert(query.end(), d.begin(), d.end());
      }
    }
    auto qf = send_frame(ch, A, B, true, SyncKind::branch_query, std::move(query));
    if (!qf) return finish();

    // B parses the query, learns A's view, answers with its own
    ByteReader qr(qf->body);
    uint8_t qlevel = qr.u8();
    auto qidx = bitmap_indices(qr.take((nbits + 7) / 8), (nbits + 7) / 8);
    Bytes reply;
    reply.push_back(qlevel);
    if (entries_level) {
      auto alists = take_entry_lists(qr, qidx.size());
      qr.expect_end("branch query");
      std::vector<std::vector<BucketEntry>> blists;
      blists.reserve(qidx.size());
      for (size_t k = 0; k < qidx.size(); ++k) {
        B.peer_entries[qidx[k]] = std::move(alists[k]);
        blists.push_back(B.tree.bucket(qidx[k]));
      }
      B.candidates = qidx;
      put_entry_lists(reply, blists);
    } else {
      std::vector<uint32_t> next_b;
      for (auto i : qidx) {
        Digest256 theirs = qr.bytes<32>();
        const auto& d = B.tree.node(qlevel, i);
        if (theirs != d) next_b.push_back(i);
        reply.insert(reply.end(), d.begin(), d.end());
      }
      qr.expect_end("branch query");
      B.pending_children.clear();
      for (auto i : next_b) {
        B.pending_children.push_back(2 * i);
        B.pending_children.push_back(2 * i + 1);
      }
    }
    auto rf = send_frame(ch, B, A, false, SyncKind::branch_reply, std::move(reply));
    if (!rf) return finish();
    ++ch.rounds;

    // A parses the reply against the children it asked about
    ByteReader rr(rf->body);
    rr.u8();
    if (entries_level) {
      auto blists = take_entry_lists(rr, children.size());
      rr.expect_end("branch reply");
      for (size_t k = 0; k < children.size(); ++k) {
        A.peer_entries[children[k]] = std::move(blists[k]);
      }
      A.candidates = children;
    } else {
      std::vector<uint32_t> next_a;
      for (auto i : children) {
        Digest256 theirs = rr.bytes<32>();
        if (theirs != A.tree.node(level, i)) next_a.push_back(i);
      }
      rr.expect_end("branch reply");
      A.pending_children.clear();
      for (auto i : next_a) {
        A.pending_children.push_back(2 * i);
        A.pending_children.push_back(2 * i + 1);
      }
    }
  }

  // each side plans its pushes from the peer's entries
  for (Side* s : {&A, &B}) {
    std::vector<RecordId> expected;
    for (auto idx : s->candidates) {
      diff_bucket(s->tree.bucket(idx), s->peer_entries[idx], s->plan, expected);
    }
    sort_by_priority(s->plan, *s->ep->ledger);
  }

  // alternating prioritized transfers, each acknowledged on acceptance
  if (!A.plan.empty() || !B.plan.empty()) ++ch.rounds;
  size_t ia = 0, ib = 0;
  while ((ia < A.plan.size() || ib < B.plan.size()) && !ch.halted()) {
    for (auto [from, to, idx, from_init] :
         {std::tuple{&A, &B, &ia, true}, std::tuple{&B, &A, &ib, false}}) {
      if (*idx >= from->plan.size() || ch.halted()) continue;
      const RecordId& id = from->plan[(*idx)++];
      Bytes body = encode_record(*from->ep->ledger->find(id));
      Bytes proof = from->ep->ledger->proof_for(id)->serialize();
      body.insert(body.end(), proof.begin(), proof.end());
      auto tf = send_frame(ch, *from, *to, from_init, SyncKind::record_transfer,
                           std::move(body));
      if (!tf) break;
      auto acked = receive_record(ch, *to, tf->body);
      if (acked) {
        send_frame(ch, *to, *from, !from_init, SyncKind::ack,
                   Bytes(acked->begin(), acked->end()));
      }
    }
  }
  if (ch.halted()) return finish();

  // final root confirmation
  ++ch.rounds;
  A.tree = SyncTree::build(*a.ledger);
  B.tree = SyncTree::build(*b.ledger);
  auto done_a = send_frame(ch, A, B, true, SyncKind::done,
                           Bytes(A.tree.root().begin(), A.tree.root().end()));
  if (!done_a) return finish();
  auto done_b = send_frame(ch, B, A, false, SyncKind::done,
                           Bytes(B.tree.root().begin(), B.tree.root().end()));
  if (!done_b) return finish();
  report.converged = done_a->body == done_b->body;
  return finish();
}

}  // namespace slh
