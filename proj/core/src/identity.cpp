#include "slh/identity.hpp"

#include "slh/sha256.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>

namespace slh {

Pseudonym derive_pseudonym(const Bytes& template_bytes, const NetworkPepper& pepper) {
  if (template_bytes.empty())
    throw Error(Errc::bad_argument, "empty biometric template");
  Sha256 h;
  h.update(pepper.data(), pepper.size());
  h.update(template_bytes);
  return h.finish();
}

Bytes QrCardPayload::serialize() const {
  Bytes out;
  out.reserve(kWireSize);
  out.push_back(version);
  out.insert(out.end(), pseudonym.begin(), pseudonym.end());
  out.insert(out.end(), facility.begin(), facility.end());
  put_u64be(out, issue_date);
  Digest256 digest = sha256(out);
  out.insert(out.end(), digest.begin(), digest.begin() + 4);
  return out;
}

QrCardPayload QrCardPayload::parse(const Bytes& wire) {
  if (wire.size() != kWireSize)
    throw Error(Errc::parse_error, "card payload must be 53 bytes");
  Digest256 digest = sha256(wire.data(), kWireSize - 4);
  if (!std::equal(digest.begin(), digest.begin() + 4, wire.end() - 4))
    throw Error(Errc::corruption, "card checksum mismatch");
  ByteReader in(wire);
  QrCardPayload p;
  p.version = in.u8();
  p.pseudonym = in.bytes<32>();
  p.facility = in.bytes<8>();
  p.issue_date = in.u64be();
  return p;
}

namespace {

constexpr char kBase32Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

std::string base32_encode(const Bytes& data) {
  std::string out;
  out.reserve((data.size() + 4) / 5 * 8);
  size_t i = 0;
  while (i < data.size()) {
    uint64_t group = 0;
    size_t have = std::min<size_t>(5, data.size() - i);
    for (size_t b = 0; b < 5; ++b)
      group = group << 8 | (b < have ? data[i + b] : 0);
    static const size_t chars_for[6] = {0, 2, 4, 5, 7, 8};
    size_t emit = chars_for[have];
    for (size_t c = 0; c < 8; ++c) {
      if (c < emit)
        out += kBase32Alphabet[(group >> (35 - 5 * c)) & 0x1f];
      else
        out += '=';
    }
    i += have;
  }
  return out;
}

Bytes base32_decode(std::string_view text) {
  while (!text.empty() && text.back() == '=') text.remove_suffix(1);
  Bytes out;
  out.reserve(text.size() * 5 / 8);
  uint64_t acc = 0;
  int bits = 0;
  for (char c : text) {
    const char* p = std::char_traits<char>::find(kBase32Alphabet, 32, char(std::toupper(uint8_t(c))));
    if (!p) throw Error(Errc::parse_error, "invalid base32 character");
    acc = acc << 5 | uint64_t(p - kBase32Alphabet);
    bits += 5;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(uint8_t(acc >> bits));
    }
  }
  if ((acc & ((uint64_t(1) << bits) - 1)) != 0)
    throw Error(Errc::parse_error, "invalid base32 trailing bits");
  return out;
}

}  // namespace

std::string QrCardPayload::to_hex_text() const { return to_hex(serialize()); }

std::string QrCardPayload::to_base32_text() const { return base32_encode(serialize()); }

QrCardPayload QrCardPayload::from_text(std::string_view text) {
  std::string trimmed;
  for (char c : text)
    if (!std::isspace(uint8_t(c))) trimmed += c;
  if (trimmed.size() == 2 * kWireSize) return parse(from_hex(trimmed));
  if (trimmed.size() == 88) return parse(base32_decode(trimmed));
  throw Error(Errc::parse_error, "unrecognized card text encoding");
}

QrCardPayload issue_qr(const Pseudonym& pseudonym, const FacilityId& facility,
                       uint64_t issue_date) {
  QrCardPayload p;
  p.pseudonym = pseudonym;
  p.facility = facility;
  p.issue_date = issue_date;
  return p;
}

const char* to_string(Relation r) {
  switch (r) {
    case Relation::mother: return "mother";
    case Relation::father: return "father";
    case Relation::guardian: return "guardian";
  }
  throw Error(Errc::bad_argument, "unknown relation");
}

Relation relation_from_string(std::string_view s) {
  if (s == "mother") return Relation::mother;
  if (s == "father") return Relation::father;
  if (s == "guardian") return Relation::guardian;
  throw Error(Errc::bad_argument, "unknown relation " + std::string(s));
}

void FamilyGraph::link(const Pseudonym& child, const Pseudonym& guardian,
                       Relation relation) {
  size_t guardian_count = 0;
  for (const FamilyEdge& e : edges_) {
    if (e.child == child) {
      ++guardian_count;
      if (e.guardian == guardian)
        throw Error(Errc::bad_argument, "family link already present");
    }
  }
  if (guardian_count >= 2)
    throw Error(Errc::bad_argument, "guardian-limit: child already has two guardians");

  // walking guardian edges from the new guardian must not reach the child
  std::deque<Pseudonym> frontier{guardian};
  std::set<Pseudonym> seen{guardian};
  while (!frontier.empty()) {
    Pseudonym at = frontier.front();
    frontier.pop_front();
    if (at == child)
      throw Error(Errc::bad_argument, "cycle: guardian chain loops back to the child");
    for (const FamilyEdge& e : edges_) {
      if (e.child == at && seen.insert(e.guardian).second)
        frontier.push_back(e.guardian);
    }
  }

  edges_.push_back({child, guardian, relation});
}

std::vector<Pseudonym> FamilyGraph::guardians_of(const Pseudonym& child) const {
  std::vector<Pseudonym> out;
  for (const FamilyEdge& e : edges_)
    if (e.child == child) out.push_back(e.guardian);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Pseudonym> FamilyGraph::children_of(const Pseudonym& guardian) const {
  std::vector<Pseudonym> out;
  for (const FamilyEdge& e : edges_)
    if (e.guardian == guardian) out.push_back(e.child);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Pseudonym> FamilyGraph::household(const Pseudonym& member) const {
  std::set<Pseudonym> seen{member};
  std::deque<Pseudonym> frontier{member};
  while (!frontier.empty()) {
    Pseudonym at = frontier.front();
    frontier.pop_front();
    for (const FamilyEdge& e : edges_) {
      if (e.child == at && seen.insert(e.guardian).second) frontier.push_back(e.guardian);
      if (e.guardian == at && seen.insert(e.child).second) frontier.push_back(e.child);
    }
  }
  return std::vector<Pseudonym>(seen.begin(), seen.end());
}

Bytes FamilyGraph::serialize() const {
  Bytes out;
  put_u32be(out, uint32_t(edges_.size()));
  for (const FamilyEdge& e : edges_) {
    out.insert(out.end(), e.child.begin(), e.child.end());
    out.insert(out.end(), e.guardian.begin(), e.guardian.end());
    out.push_back(uint8_t(e.relation));
  }
  return out;
}

FamilyGraph FamilyGraph::deserialize(const Bytes& data) {
  ByteReader in(data);
  uint32_t count = in.u32be();
  FamilyGraph g;
  for (uint32_t i = 0; i < count; ++i) {
    Pseudonym child = in.bytes<32>();
    Pseudonym guardian = in.bytes<32>();
    uint8_t rel = in.u8();
    if (rel > uint8_t(Relation::guardian))
      throw Error(Errc::parse_error, "unknown relation code");
    g.link(child, guardian, Relation(rel));  // revalidates the invariants
  }
  in.expect_end("family graph");
  return g;
}

void IdentityMappingStore::put(const Pseudonym& pseudonym, DemographicRecord demographics) {
  if (tier_ < 2)
    throw Error(Errc::tier_violation, "identity mappings are not storable below tier 2");
  entries_[pseudonym] = std::move(demographics);
}

std::optional<DemographicRecord> IdentityMappingStore::get(const Pseudonym& pseudonym) const {
  auto it = entries_.find(pseudonym);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

Bytes IdentityMappingStore::serialize() const {
  if (tier_ < 2)
    throw Error(Errc::tier_violation, "identity mappings are not storable below tier 2");
  Bytes out;
  put_u32be(out, uint32_t(entries_.size()));
  for (const auto& [pseudonym, demo] : entries_) {
    out.insert(out.end(), pseudonym.begin(), pseudonym.end());
    if (demo.name.size() > 0xffff || demo.village_code.size() > 0xffff)
      throw Error(Errc::bad_argument, "demographic field too long");
    put_u16be(out, uint16_t(demo.name.size()));
    out.insert(out.end(), demo.name.begin(), demo.name.end());
    put_u16be(out, demo.birth_year);
    put_u16be(out, uint16_t(demo.village_code.size()));
    out.insert(out.end(), demo.village_code.begin(), demo.village_code.end());
  }
  return out;
}

IdentityMappingStore IdentityMappingStore::deserialize(const Bytes& data, uint8_t node_tier) {
  if (node_tier < 2)
    throw Error(Errc::tier_violation, "identity mappings are not storable below tier 2");
  ByteReader in(data);
  uint32_t count = in.u32be();
  IdentityMappingStore store(node_tier);
  for (uint32_t i = 0; i < count; ++i) {
    Pseudonym p = in.bytes<32>();
    DemographicRecord demo;
    Bytes name = in.blob(in.u16be());
    demo.name.assign(name.begin(), name.end());
    demo.birth_year = in.u16be();
    Bytes village = in.blob(in.u16be());
    demo.village_code.assign(village.begin(), village.end());
    store.entries_[p] = std::move(demo);
  }
  in.expect_end("identity mappings");
  return store;
}

MatchResult demographic_match(const DemographicQuery& query,
                              const IdentityMappingStore& store) {
  if (store.tier() < 2)
    throw Error(Errc::tier_violation, "demographic search runs at tier 2 or higher");
  if (!query.name && !query.birth_year && !query.village_code)
    throw Error(Errc::bad_argument, "empty demographic query");

  MatchResult result;
  for (const auto& [pseudonym, demo] : store.entries()) {
    uint32_t score = 0;
    bool exact = true;
    if (query.name) {
      if (demo.name == *query.name)
        score += 2;
      else
        exact = false;
    }
    if (query.birth_year) {
      int diff = int(demo.birth_year) - int(*query.birth_year);
      if (diff == 0) {
        score += 2;
      } else if (diff == 1 || diff == -1) {
        score += 1;
        exact = false;
      } else {
        exact = false;
      }
    }
    if (query.village_code) {
      if (demo.village_code == *query.village_code)
        score += 2;
      else
        exact = false;
    }
    if (score > 0) result.candidates.push_back({pseudonym, demo, score, exact});
  }

  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const MatchCandidate& a, const MatchCandidate& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.pseudonym < b.pseudonym;
            });

  result.uncertain = true;
  if (!result.candidates.empty() && result.candidates[0].exact &&
      (result.candidates.size() == 1 ||
       result.candidates[1].score < result.candidates[0].score)) {
    result.uncertain = false;
  }
  return result;
}

static const char kNodeStateMagic[8] = {'S', 'L', 'H', 'N', 'O', 'D', 'E', '1'};

Bytes serialize_node_state(uint8_t tier, const Ledger& ledger,
                           const IdentityMappingStore* mappings) {
  if (tier < 2 && mappings && mappings->size() > 0)
    throw Error(Errc::tier_violation, "identity mappings are not storable below tier 2");

  Bytes out(kNodeStateMagic, kNodeStateMagic + sizeof kNodeStateMagic);
  out.push_back(tier);
  Bytes ledger_bytes = ledger.serialize();
  put_u64be(out, ledger_bytes.size());
  out.insert(out.end(), ledger_bytes.begin(), ledger_bytes.end());
  if (tier >= 2 && mappings) {
    Bytes map_bytes = mappings->serialize();
    put_u64be(out, map_bytes.size());
    out.insert(out.end(), map_bytes.begin(), map_bytes.end());
  } else {
    put_u64be(out, 0);
  }
  return out;
}

NodeState parse_node_state(const Bytes& data, const DeviceRegistry* registry) {
  ByteReader in(data);
  auto magic = in.bytes<8>();
  if (!std::equal(magic.begin(), magic.end(), kNodeStateMagic))
    throw Error(Errc::parse_error, "not a node state file");
  uint8_t tier = in.u8();
  Bytes ledger_bytes = in.blob(size_t(in.u64be()));
  uint64_t map_len = in.u64be();
  if (tier < 2 && map_len != 0)
    throw Error(Errc::corruption, "tier-1 state carries identity mappings");
  Bytes map_bytes = in.blob(size_t(map_len));
  in.expect_end("node state");

  NodeState state{tier, Ledger::deserialize(ledger_bytes, registry),
                  IdentityMappingStore(tier)};
  if (tier >= 2 && map_len > 0)
    state.mappings = IdentityMappingStore::deserialize(map_bytes, tier);
  return state;
}

}  // namespace slh
