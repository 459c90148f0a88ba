#include <doctest.h>

#include <slh/rng.hpp>
#include <slh/sync.hpp>

#include <algorithm>
#include <set>
#include <tuple>

#include "support/fixtures.hpp"

using namespace slh;
using namespace testsupport;

namespace {

// One sync participant: device, registry, ledger, replay cache, quarantine.
struct Party {
  DeviceProfile dev;
  DeviceRegistry registry;
  Ledger ledger;
  ReplayCache replay;
  std::vector<RecordId> quarantine;

  Party(uint64_t device_num, const char* facility, uint8_t secret = 0x42)
      : dev(make_device(device_num, secret)),
        ledger(facility_id_from_string(facility), &registry) {
    registry.add(dev);
  }

  SyncEndpoint endpoint() {
    return {&ledger, &dev, &registry, &replay, &quarantine};
  }
};

void cross_register(Party& a, Party& b) {
  a.registry.add(b.dev);
  b.registry.add(a.dev);
}

// Appends the same record with the same proof to both ledgers.
void seed_shared(Party& a, Party& b, uint64_t lo, uint64_t hi) {
  for (uint64_t n = lo; n < hi; ++n) {
    auto rec = make_record(n);
    auto proof = sign_record(rec, a.dev);
    a.ledger.append_record(rec, proof);
    b.ledger.append_record(rec, proof);
  }
}

void put(Party& p, uint64_t n, uint8_t flags = 0) {
  auto rec = make_record(n);
  rec.flags = flags;
  p.ledger.append_record(rec, sign_record(rec, p.dev));
}

SyncWindow wide_window(uint64_t open = 10'000) { return {open, open + 3'600}; }

size_t count_kind(const std::vector<TranscriptEntry>& transcript, SyncKind k) {
  size_t n = 0;
  for (const auto& e : transcript) {
    if (SyncFrame::deserialize(e.wire).kind == k) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("sync tree is append order independent") {
  DeviceRegistry reg;
  auto dev = make_device(1);
  reg.add(dev);

  std::vector<uint64_t> order_a, order_b;
  for (uint64_t n = 0; n < 50; ++n) order_a.push_back(n);
  order_b = order_a;
  DetRng(99).shuffle(order_b);
  REQUIRE(order_a != order_b);

  Ledger la({}, &reg), lb({}, &reg);
  for (auto n : order_a) {
    auto rec = make_record(n);
    la.append_record(rec, sign_record(rec, dev));
  }
  for (auto n : order_b) {
    auto rec = make_record(n);
    lb.append_record(rec, sign_record(rec, dev));
  }

  CHECK(la.root() != lb.root());  // the ledger tree orders by append
  SyncTree ta = SyncTree::build(la);
  SyncTree tb = SyncTree::build(lb);
  CHECK(ta.root() == tb.root());
  CHECK(ta.depth() == kSyncTreeDepth);
  CHECK(ta.record_count() == 50);

  SUBCASE("content changes move the root") {
    auto rec = *la.find(make_record_id(7));
    rec.payload.push_back(0xEE);
    la.update_record(rec, sign_record(rec, dev, rec.created_at + 900));
    SyncTree ta2 = SyncTree::build(la);
    CHECK(ta2.root() != tb.root());

    uint32_t idx = SyncTree::bucket_for(rec.record_id, kSyncTreeDepth);
    bool found = false;
    for (const auto& e : ta2.bucket(idx)) {
      if (e.record_id != rec.record_id) continue;
      found = true;
      CHECK(e.leaf == leaf_hash(rec));
      CHECK(e.stamp() == la.lww_stamp(rec.record_id));
      CHECK(e.edited_at == rec.created_at + 900);
    }
    CHECK(found);
  }

  SUBCASE("empty ledgers share a root") {
    Ledger e1({}, &reg), e2({}, &reg);
    CHECK(SyncTree::build(e1).root() == SyncTree::build(e2).root());
    CHECK(SyncTree::build(e1).root() != ta.root());
  }

  SUBCASE("bounds and depth validation") {
    CHECK_THROWS_AS(SyncTree::build(la, 0), Error);
    CHECK_THROWS_AS(SyncTree::build(la, 17), Error);
    CHECK_THROWS_AS(ta.node(9, 0), Error);
    CHECK_THROWS_AS(ta.node(3, 8), Error);
    CHECK_THROWS_AS(ta.bucket(256), Error);
    CHECK(ta.node(0, 0) == ta.root());
  }
}

TEST_CASE("sync tree hashing matches the documented rules") {
  DeviceRegistry reg;
  auto dev = make_device(1);
  reg.add(dev);
  Ledger ledger({}, &reg);
  for (uint64_t n = 0; n < 40; ++n) {
    auto rec = make_record(n);
    ledger.append_record(rec, sign_record(rec, dev));
  }
  SyncTree tree = SyncTree::build(ledger);

  // buckets: top depth bits of sha256(record_id)
  for (uint64_t n = 0; n < 40; ++n) {
    auto id = make_record_id(n);
    auto h = sha256(id.data(), id.size());
    CHECK(SyncTree::bucket_for(id, 8) == h[0]);
    CHECK(SyncTree::bucket_for(id, 4) == uint32_t(h[0] >> 4));
    bool present = false;
    for (const auto& e : tree.bucket(h[0])) present |= e.record_id == id;
    CHECK(present);
  }

  // bucket digest: sha256d(0x02 ∥ sorted (record_id ∥ leaf) pairs)
  uint32_t idx = SyncTree::bucket_for(make_record_id(3), 8);
  const auto& entries = tree.bucket(idx);
  REQUIRE(!entries.empty());
  CHECK(std::is_sorted(entries.begin(), entries.end(),
                       [](const BucketEntry& x, const BucketEntry& y) {
                         return x.record_id < y.record_id;
                       }));
  Bytes buf{0x02};
  for (const auto& e : entries) {
    buf.insert(buf.end(), e.record_id.begin(), e.record_id.end());
    buf.insert(buf.end(), e.leaf.begin(), e.leaf.end());
  }
  CHECK(bucket_digest(entries) == sha256d(buf));
  CHECK(bucket_digest({}) == sha256d(Bytes{0x02}));

  // interior: sha256d(0x03 ∥ left ∥ right), folded to the root
  std::vector<Digest256> level(256);
  for (uint32_t i = 0; i < 256; ++i) level[i] = bucket_digest(tree.bucket(i));
  CHECK(level[0] == tree.node(8, 0));
  while (level.size() > 1) {
    std::vector<Digest256> up(level.size() / 2);
    for (size_t i = 0; i < up.size(); ++i) {
      Bytes node{0x03};
      node.insert(node.end(), level[2 * i].begin(), level[2 * i].end());
      node.insert(node.end(), level[2 * i + 1].begin(), level[2 * i + 1].end());
      up[i] = sha256d(node);
    }
    level = std::move(up);
  }
  CHECK(level[0] == tree.root());
}

TEST_CASE("sync frame codec") {
  CHECK(kSyncFrameOverhead == 61);

  SyncFrame f;
  f.kind = SyncKind::branch_query;
  f.body = {1, 2, 3, 4, 5};
  f.auth.window_start = 123456;
  f.auth.nonce.fill(0xAB);
  f.auth.tag.fill(0xCD);

  Bytes wire = f.serialize();
  CHECK(wire.size() == kSyncFrameOverhead + 5);
  CHECK(wire[0] == 2);
  CHECK(wire[1] == 0);
  CHECK(wire[4] == 5);

  SyncFrame g = SyncFrame::deserialize(wire);
  CHECK(g.kind == f.kind);
  CHECK(g.body == f.body);
  CHECK(g.auth.tag == f.auth.tag);
  CHECK(g.auth.window_start == 123456);

  SUBCASE("rejects damage") {
    Bytes bad = wire;
    bad[0] = 0;
    CHECK_THROWS_AS(SyncFrame::deserialize(bad), Error);
    bad[0] = 7;
    CHECK_THROWS_AS(SyncFrame::deserialize(bad), Error);
    Bytes truncated(wire.begin(), wire.end() - 1);
    CHECK_THROWS_AS(SyncFrame::deserialize(truncated), Error);
    Bytes padded = wire;
    padded.push_back(0);
    CHECK_THROWS_AS(SyncFrame::deserialize(padded), Error);
  }

  SUBCASE("kind names") {
    CHECK(std::string(to_string(SyncKind::root_hello)) == "root-hello");
    CHECK(std::string(to_string(SyncKind::record_transfer)) == "record-transfer");
    CHECK(std::string(to_string(SyncKind::done)) == "done");
  }
}

TEST_CASE("conflict resolution is symmetric and last write wins") {
  Digest256 leaf_a{}, leaf_b{};
  leaf_a.fill(0x11);
  leaf_b.fill(0x22);

  LwwStamp early{1000, device_id_from_u64(9)};
  LwwStamp late{2000, device_id_from_u64(1)};
  CHECK(resolve_conflict(late, leaf_a, early, leaf_b) == -1);
  CHECK(resolve_conflict(early, leaf_a, late, leaf_b) == 1);

  // equal timestamps: higher editor id wins
  LwwStamp lo{1000, device_id_from_u64(3)};
  LwwStamp hi{1000, device_id_from_u64(4)};
  CHECK(resolve_conflict(hi, leaf_a, lo, leaf_b) == -1);
  CHECK(resolve_conflict(lo, leaf_a, hi, leaf_b) == 1);

  // identical leaves are a no-op regardless of stamps
  CHECK(resolve_conflict(early, leaf_a, late, leaf_a) == 0);

  // equal stamps fall back to leaf order, still symmetric
  CHECK(resolve_conflict(lo, leaf_a, lo, leaf_b) == 1);
  CHECK(resolve_conflict(lo, leaf_b, lo, leaf_a) == -1);

  DetRng rng(0x5eed);
  for (int i = 0; i < 300; ++i) {
    LwwStamp s1{1000 + rng.below(4), device_id_from_u64(rng.below(3))};
    LwwStamp s2{1000 + rng.below(4), device_id_from_u64(rng.below(3))};
    Digest256 l1{}, l2{};
    l1[0] = uint8_t(rng.below(4));
    l2[0] = uint8_t(rng.below(4));
    int w = resolve_conflict(s1, l1, s2, l2);
    CHECK(w == -resolve_conflict(s2, l2, s1, l1));
    if (l1 == l2) CHECK(w == 0);
    if (l1 != l2) CHECK(w != 0);
  }
}

TEST_CASE("transfer priority lattice matches a plain comparator") {
  // independent oracle: emergencies first, then pending referrals, then
  // oldest first, then youngest patient, then record id
  auto oracle = [](const HealthRecord& a, const HealthRecord& b) {
    auto key = [](const HealthRecord& r) {
      return std::tuple(!r.emergency(), !r.referral_pending(), r.created_at,
                        -int(r.patient_birth_year), r.record_id);
    };
    return key(a) < key(b);
  };

  DetRng rng(0xbeef);
  std::vector<HealthRecord> records;
  for (uint64_t n = 0; n < 300; ++n) {
    auto r = make_record(n);
    r.flags = uint8_t(rng.below(4));
    r.created_at = 1700000000 + rng.below(40) * 3600;
    r.patient_birth_year = uint16_t(1950 + rng.below(6));
    records.push_back(r);
  }

  for (size_t i = 0; i < 60; ++i) {
    for (size_t j = 0; j < 60; ++j) {
      CHECK(sync_priority_less(records[i], records[j]) ==
            oracle(records[i], records[j]));
    }
  }
  CHECK(!sync_priority_less(records[0], records[0]));

  auto sorted_a = records, sorted_b = records;
  std::sort(sorted_a.begin(), sorted_a.end(), sync_priority_less);
  std::sort(sorted_b.begin(), sorted_b.end(), oracle);
  for (size_t i = 0; i < records.size(); ++i) {
    CHECK(sorted_a[i].record_id == sorted_b[i].record_id);
  }

  // a later emergency outranks an earlier routine record
  auto routine = make_record(1);
  auto emergency = make_record(2);
  emergency.created_at = routine.created_at + 86400;
  emergency.flags = kFlagEmergency;
  CHECK(sync_priority_less(emergency, routine));
}

TEST_CASE("plan sync walks digests down to the difference") {
  DeviceRegistry reg;
  auto dev = make_device(1);
  reg.add(dev);

  Ledger la({}, &reg), lb({}, &reg);
  for (uint64_t n = 0; n < 1024; ++n) {
    auto rec = make_record(n);
    auto proof = sign_record(rec, dev);
    la.append_record(rec, proof);
    lb.append_record(rec, proof);
  }

  SUBCASE("identical ledgers need nothing") {
    auto plan = plan_sync(la, tree_access(SyncTree::build(lb)));
    CHECK(plan.size() == 0);
    CHECK(plan.transfers.empty());
    CHECK(plan.expected.empty());
    CHECK(plan.branch_queries == 0);
  }

  SUBCASE("one changed record out of 1024") {
    auto rec = *la.find(make_record_id(700));
    rec.payload = {0xD1, 0xFF};
    la.update_record(rec, sign_record(rec, dev, rec.created_at + 600));

    auto plan = plan_sync(la, tree_access(SyncTree::build(lb)));
    CHECK(plan.size() == 1);
    REQUIRE(plan.transfers.size() == 1);
    CHECK(plan.transfers[0] == rec.record_id);
    CHECK(plan.branch_queries <= kSyncTreeDepth);

    auto reverse = plan_sync(lb, tree_access(SyncTree::build(la)));
    CHECK(reverse.size() == 1);
    REQUIRE(reverse.expected.size() == 1);
    CHECK(reverse.expected[0] == rec.record_id);
    CHECK(reverse.branch_queries <= kSyncTreeDepth);
  }

  SUBCASE("one missing record out of 1024") {
    auto rec = make_record(5000);
    la.append_record(rec, sign_record(rec, dev));
    auto plan = plan_sync(la, tree_access(SyncTree::build(lb)));
    CHECK(plan.transfers == std::vector<RecordId>{rec.record_id});
    CHECK(plan.expected.empty());
    CHECK(plan.branch_queries == kSyncTreeDepth);
  }

  SUBCASE("transfers come out in priority order") {
    auto stat = make_record(9001);  // emergency, newest
    stat.created_at = 1800000000;
    stat.flags = kFlagEmergency;
    auto referral = make_record(9002);
    referral.created_at = 1790000000;
    referral.flags = kFlagReferralPending;
    auto old_note = make_record(9003);
    old_note.created_at = 1700000123;
    auto new_note = make_record(9004);
    new_note.created_at = 1750000000;

    std::vector<HealthRecord> want{stat, referral, old_note, new_note};
    for (auto it = want.rbegin(); it != want.rend(); ++it) {
      la.append_record(*it, sign_record(*it, dev));  // reverse append order
    }
    auto plan = plan_sync(la, tree_access(SyncTree::build(lb)));
    REQUIRE(plan.transfers.size() == 4);
    for (size_t i = 0; i < want.size(); ++i) {
      CHECK(plan.transfers[i] == want[i].record_id);
    }
  }

  SUBCASE("depth mismatch is a protocol error") {
    TreeAccess bogus;
    bogus.root = [] { return Digest256{}; };
    bogus.depth = [] { return uint8_t(4); };
    CHECK_THROWS_WITH_AS(plan_sync(la, bogus), "incompatible tree depth", Error);
  }
}

TEST_CASE("equal ledgers exchange exactly one root each way") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 20);

  std::vector<TranscriptEntry> transcript;
  SyncOptions opts;
  opts.rng_seed = 41;
  opts.transcript = &transcript;
  auto report = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(), opts);

  CHECK(report.converged);
  CHECK(report.rounds == 1);
  CHECK(report.records_transferred == 0);
  CHECK(!report.aborted);
  CHECK(!report.window_closed);
  CHECK(report.quarantined == 0);

  REQUIRE(transcript.size() == 2);
  for (const auto& e : transcript) {
    auto f = SyncFrame::deserialize(e.wire);
    CHECK(f.kind == SyncKind::root_hello);
    CHECK(f.body.size() == 32);
    CHECK(e.wire.size() == 93);
  }
  CHECK(transcript[0].from_initiator);
  CHECK(!transcript[1].from_initiator);
  CHECK(report.bytes_sent == 93);
  CHECK(report.bytes_received == 93);
  CHECK(report.duration_seconds > 0.0);
}

TEST_CASE("sync transfers missing records both ways") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 16);
  put(a, 100);
  put(a, 101, kFlagEmergency);
  put(a, 102);
  put(b, 200);
  put(b, 201);

  std::vector<TranscriptEntry> transcript;
  SyncOptions opts;
  opts.rng_seed = 42;
  opts.transcript = &transcript;
  auto report = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(), opts);

  CHECK(report.converged);
  CHECK(report.records_transferred == 5);
  CHECK(!report.aborted);
  CHECK(!report.window_closed);
  CHECK(report.rounds == 1 + kSyncTreeDepth + 1 + 1);
  CHECK(a.ledger.size() == 21);
  CHECK(b.ledger.size() == 21);
  for (uint64_t n : {100u, 101u, 102u, 200u, 201u}) {
    CHECK(a.ledger.contains(make_record_id(n)));
    CHECK(b.ledger.contains(make_record_id(n)));
  }
  CHECK(SyncTree::build(a.ledger).root() == SyncTree::build(b.ledger).root());

  // descent costs one query and one reply per level
  CHECK(count_kind(transcript, SyncKind::branch_query) == kSyncTreeDepth);
  CHECK(count_kind(transcript, SyncKind::branch_reply) == kSyncTreeDepth);
  CHECK(count_kind(transcript, SyncKind::record_transfer) == 5);
  CHECK(count_kind(transcript, SyncKind::ack) == 5);
  CHECK(count_kind(transcript, SyncKind::done) == 2);

  // the emergency record jumps the queue on A's side
  std::vector<RecordId> a_pushes;
  for (const auto& e : transcript) {
    auto f = SyncFrame::deserialize(e.wire);
    if (f.kind == SyncKind::record_transfer && e.from_initiator) {
      ByteReader r(f.body);
      a_pushes.push_back(decode_record(r).record_id);
    }
  }
  REQUIRE(a_pushes.size() == 3);
  CHECK(a_pushes[0] == make_record_id(101));

  // byte accounting is the whole transcript, both directions
  uint64_t wire_total = 0;
  for (const auto& e : transcript) wire_total += e.wire.size();
  CHECK(report.bytes_sent + report.bytes_received == wire_total);

  // zero-latency timing model: duration is exactly the airtime
  CHECK(report.duration_seconds ==
        doctest::Approx(double(wire_total) * 8.0 / 9600.0));
}

TEST_CASE("a small delta syncs in a small fraction of the ledger") {
  DeviceRegistry reg;
  auto dev_a = make_device(1);
  auto dev_b = make_device(2, 0x77);
  reg.add(dev_a);
  reg.add(dev_b);

  Ledger la({}, &reg), lb({}, &reg);
  for (uint64_t n = 0; n < 1024; ++n) {
    auto rec = make_record(n);
    auto proof = sign_record(rec, dev_a);
    la.append_record(rec, proof);
    lb.append_record(rec, proof);
  }
  auto extra = make_record(5000);
  la.append_record(extra, sign_record(extra, dev_a));

  ReplayCache replay_a, replay_b;
  SyncEndpoint ea{&la, &dev_a, &reg, &replay_a};
  SyncEndpoint eb{&lb, &dev_b, &reg, &replay_b};
  std::vector<TranscriptEntry> transcript;
  SyncOptions opts;
  opts.rng_seed = 49;
  opts.transcript = &transcript;
  auto report = run_sync(ea, eb, {}, wide_window(), opts);

  CHECK(report.converged);
  CHECK(report.records_transferred == 1);
  CHECK(lb.contains(extra.record_id));

  uint64_t wire_total = 0;
  for (const auto& e : transcript) wire_total += e.wire.size();
  Bytes full = la.serialize();
  CHECK(wire_total < full.size() / 10);  // digests beat replaying the ledger
}

TEST_CASE("conflicting edits settle on the last writer everywhere") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 8);

  auto id = make_record_id(3);
  auto rec_a = *a.ledger.find(id);
  rec_a.payload = {0xAA};
  a.ledger.update_record(rec_a, sign_record(rec_a, a.dev, 1800000000));
  auto rec_b = *b.ledger.find(id);
  rec_b.payload = {0xBB};
  b.ledger.update_record(rec_b, sign_record(rec_b, b.dev, 1800000600));

  auto report = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(),
                         {.rng_seed = 43});

  CHECK(report.converged);
  CHECK(report.records_transferred == 1);  // only the winner moves
  CHECK(a.ledger.find(id)->payload == Bytes{0xBB});
  CHECK(b.ledger.find(id)->payload == Bytes{0xBB});
  CHECK(a.ledger.lww_stamp(id) == b.ledger.lww_stamp(id));
  CHECK(a.ledger.versions(id).size() == 3);  // base, own edit, winner
  CHECK(b.ledger.versions(id).size() == 2);  // base, own (winning) edit
  CHECK(SyncTree::build(a.ledger).root() == SyncTree::build(b.ledger).root());
}

TEST_CASE("records failing proof verification are quarantined") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 8);

  // rogue device known only to A's registry: B must reject its records
  auto rogue = make_device(66, 0x13);
  a.registry.add(rogue);
  auto bad = make_record(300);
  a.ledger.append_record(bad, sign_record(bad, rogue));
  put(a, 301);

  auto report = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(),
                         {.rng_seed = 44});

  CHECK(report.quarantined == 1);
  CHECK(report.records_transferred == 1);
  CHECK(!report.aborted);
  CHECK(!report.converged);  // the rejected record still divides the trees
  CHECK(!b.ledger.contains(bad.record_id));
  CHECK(b.ledger.contains(make_record_id(301)));
  REQUIRE(b.quarantine.size() == 1);
  CHECK(b.quarantine[0] == bad.record_id);
  CHECK(a.quarantine.empty());
}

TEST_CASE("frame loss aborts the session") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 4);
  put(a, 100);

  LinkShape lossy;
  lossy.loss_rate = 1.0;
  std::vector<TranscriptEntry> transcript;
  SyncOptions opts;
  opts.rng_seed = 45;
  opts.transcript = &transcript;
  auto report = run_sync(a.endpoint(), b.endpoint(), lossy, wide_window(), opts);

  CHECK(report.aborted);
  CHECK(!report.converged);
  CHECK(report.records_transferred == 0);
  CHECK(transcript.empty());       // nothing was delivered
  CHECK(report.bytes_sent == 93);  // the burned hello
  CHECK(report.bytes_received == 0);
  CHECK(b.ledger.size() == 4);
}

TEST_CASE("a forged peer identity aborts the session") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  // B's registry carries a wrong secret for A's device id, so A's very
  // first frame fails authentication
  auto imposter = make_device(1, 0x99);
  b.registry.add(imposter);
  a.registry.add(b.dev);
  put(a, 100);

  auto report = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(),
                         {.rng_seed = 46});

  CHECK(report.aborted);
  CHECK(!report.converged);
  CHECK(report.records_transferred == 0);
  CHECK(b.ledger.size() == 0);
}

TEST_CASE("a replayed session is rejected by the receiver") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 4);

  SyncWindow w{1'000, 1'000 + 600};
  auto first = run_sync(a.endpoint(), b.endpoint(), {}, w, {.rng_seed = 7});
  CHECK(first.converged);

  // same window, same seed, same caches: the hello tag repeats verbatim
  auto replay = run_sync(a.endpoint(), b.endpoint(), {}, w, {.rng_seed = 7});
  CHECK(replay.aborted);
  CHECK(!replay.converged);

  // a fresh seed yields fresh nonces and passes
  auto retry = run_sync(a.endpoint(), b.endpoint(), {}, w, {.rng_seed = 8});
  CHECK(retry.converged);
  CHECK(!retry.aborted);
}

TEST_CASE("a closing window stops the session without losing progress") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 8);
  for (uint64_t n = 100; n < 106; ++n) put(a, n);

  SyncWindow tight{10'000, 10'001};  // one second of airtime at 9600 bps
  auto cut = run_sync(a.endpoint(), b.endpoint(), {}, tight, {.rng_seed = 47});
  CHECK(cut.window_closed);
  CHECK(!cut.converged);
  CHECK(!cut.aborted);
  CHECK(cut.duration_seconds <= 1.0);
  size_t partial = b.ledger.size();
  CHECK(partial < 14);

  auto resumed = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(20'000),
                          {.rng_seed = 48});
  CHECK(resumed.converged);
  CHECK(b.ledger.size() == 14);
  CHECK(b.ledger.size() >= partial);
}

TEST_CASE("interruption at any frame resumes to identical ledgers") {
  auto build = [](Party& a, Party& b) {
    cross_register(a, b);
    seed_shared(a, b, 0, 6);
    put(a, 100);
    put(a, 101, kFlagEmergency);
    put(b, 200);
  };

  // uninterrupted reference run
  Bytes ref_a, ref_b;
  size_t total_frames;
  {
    Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
    build(a, b);
    std::vector<TranscriptEntry> transcript;
    SyncOptions opts;
    opts.rng_seed = 50;
    opts.transcript = &transcript;
    auto report = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(), opts);
    REQUIRE(report.converged);
    ref_a = a.ledger.serialize();
    ref_b = b.ledger.serialize();
    total_frames = transcript.size();
  }
  REQUIRE(total_frames > 20);

  for (size_t limit = 1; limit < total_frames; ++limit) {
    CAPTURE(limit);
    Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
    build(a, b);

    SyncOptions cut;
    cut.rng_seed = 1000 + limit;
    cut.frame_limit = limit;
    auto first = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(), cut);
    CHECK(first.window_closed);
    CHECK(!first.aborted);

    auto second = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(20'000),
                           {.rng_seed = 2000 + limit});
    CHECK(second.converged);
    CHECK(a.ledger.serialize() == ref_a);
    CHECK(b.ledger.serialize() == ref_b);
  }
}

TEST_CASE("sync transcript golden") {
  Party a(1, "FAC-AAAA"), b(2, "FAC-BBBB", 0x77);
  cross_register(a, b);
  seed_shared(a, b, 0, 8);
  put(a, 100);
  put(a, 101, kFlagEmergency);
  put(b, 200);

  std::vector<TranscriptEntry> transcript;
  SyncOptions opts;
  opts.rng_seed = 60;
  opts.transcript = &transcript;
  auto report = run_sync(a.endpoint(), b.endpoint(), {}, wide_window(), opts);
  REQUIRE(report.converged);

  Bytes all;
  for (const auto& e : transcript) {
    all.push_back(e.from_initiator ? 0x01 : 0x00);
    put_u32be(all, uint32_t(e.wire.size()));
    all.insert(all.end(), e.wire.begin(), e.wire.end());
  }
  // pins the whole wire protocol: framing, MACs, descent bodies, transfer
  // and ack layout; any change to the format shows up here first
  CHECK(to_hex(sha256(all)) ==
        "7e3bb25be589d3b36c3b3fb0d91470d752cf60568d401fe979b8f08c030c01ad");
}
