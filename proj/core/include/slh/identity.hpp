#pragma once

#include "slh/ledger.hpp"
#include "slh/record.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace slh {

using NetworkPepper = std::array<uint8_t, 32>;

// sha256(pepper ∥ template). The template is an opaque byte sequence from
// the capture pipeline; the pepper is the single network-wide secret
// provisioned at tier 2 and above, so a pseudonym carries no recoverable
// demographics and stays stable across facilities. Throws on an empty
// template.
Pseudonym derive_pseudonym(const Bytes& template_bytes, const NetworkPepper& pepper);

// Laminated-card payload. Wire layout, big-endian:
//   version(1) ∥ pseudonym(32) ∥ facility(8) ∥ issue_date(8) ∥ checksum(4)
// 53 bytes; the checksum is the first 4 bytes of sha256 over the preceding
// 49, so any single corrupted byte fails parse.
struct QrCardPayload {
  uint8_t version = 1;
  Pseudonym pseudonym{};
  FacilityId facility{};
  uint64_t issue_date = 0;  // seconds UTC

  static constexpr size_t kWireSize = 53;

  Bytes serialize() const;
  static QrCardPayload parse(const Bytes& wire);

  // text encodings for card printing pipelines
  std::string to_hex_text() const;     // 106 chars
  std::string to_base32_text() const;  // 88 chars, RFC 4648 alphabet, padded
  static QrCardPayload from_text(std::string_view text);  // accepts either

  bool operator==(const QrCardPayload&) const = default;
};

QrCardPayload issue_qr(const Pseudonym& pseudonym, const FacilityId& facility,
                       uint64_t issue_date);

enum class Relation : uint8_t {
  mother = 0,
  father = 1,
  guardian = 2,
};

const char* to_string(Relation r);
Relation relation_from_string(std::string_view s);

struct FamilyEdge {
  Pseudonym child{};
  Pseudonym guardian{};
  Relation relation = Relation::guardian;

  bool operator==(const FamilyEdge&) const = default;
};

// Directed child → guardian edges. Kept acyclic over guardian edges and
// capped at two guardians per child; queries never infer edges beyond the
// stored set.
class FamilyGraph {
 public:
  // Throws: "guardian-limit" when the child already has two guardians,
  // "cycle" when the new edge would let a guardian chain loop back.
  void link(const Pseudonym& child, const Pseudonym& guardian, Relation relation);

  const std::vector<FamilyEdge>& edges() const { return edges_; }
  size_t size() const { return edges_.size(); }

  std::vector<Pseudonym> guardians_of(const Pseudonym& child) const;
  std::vector<Pseudonym> children_of(const Pseudonym& guardian) const;

  // everyone connected to `member` through stored edges, either direction,
  // member included; sorted by pseudonym bytes
  std::vector<Pseudonym> household(const Pseudonym& member) const;

  Bytes serialize() const;
  static FamilyGraph deserialize(const Bytes& data);

 private:
  std::vector<FamilyEdge> edges_;
};

struct DemographicRecord {
  std::string name;
  uint16_t birth_year = 0;
  std::string village_code;

  bool operator==(const DemographicRecord&) const = default;
};

// pseudonym → demographics. The privacy partition is enforced here: a store
// on a node below tier 2 refuses to hold or serialize mappings, so a rural
// node's persisted state can never contain them.
class IdentityMappingStore {
 public:
  explicit IdentityMappingStore(uint8_t node_tier) : tier_(node_tier) {}

  uint8_t tier() const { return tier_; }
  size_t size() const { return entries_.size(); }

  void put(const Pseudonym& pseudonym, DemographicRecord demographics);
  std::optional<DemographicRecord> get(const Pseudonym& pseudonym) const;

  const std::map<Pseudonym, DemographicRecord>& entries() const { return entries_; }

  Bytes serialize() const;  // throws tier_violation below tier 2
  static IdentityMappingStore deserialize(const Bytes& data, uint8_t node_tier);

 private:
  uint8_t tier_;
  std::map<Pseudonym, DemographicRecord> entries_;
};

// Partial demographics for emergency lookup; at least one field must be set.
struct DemographicQuery {
  std::optional<std::string> name;
  std::optional<uint16_t> birth_year;
  std::optional<std::string> village_code;
};

struct MatchCandidate {
  Pseudonym pseudonym{};
  DemographicRecord demographics;
  uint32_t score = 0;  // 2 per exact field, 1 for a birth year within ±1
  bool exact = false;  // every provided field matched exactly
};

struct MatchResult {
  std::vector<MatchCandidate> candidates;  // score desc, pseudonym asc
  bool uncertain = true;  // false only for a unique all-exact top match
};

// Field-count scorer (declared placeholder for the emergency workflow):
// exact fields score 2, a birth year off by one scores 1, zero-score
// entries are dropped. Runs only against a tier >= 2 store.
MatchResult demographic_match(const DemographicQuery& query,
                              const IdentityMappingStore& store);

// One node's durable footprint:
//   "SLHNODE1" ∥ tier(1) ∥ ledger_len(8 BE) ∥ ledger ∥ map_len(8 BE) ∥ mappings
// Below tier 2 the mapping section must be empty; passing a populated store
// throws tier_violation and parsing such bytes reports corruption.
Bytes serialize_node_state(uint8_t tier, const Ledger& ledger,
                           const IdentityMappingStore* mappings);

struct NodeState {
  uint8_t tier = 1;
  Ledger ledger;
  IdentityMappingStore mappings;
};

NodeState parse_node_state(const Bytes& data, const DeviceRegistry* registry);

}  // namespace slh
