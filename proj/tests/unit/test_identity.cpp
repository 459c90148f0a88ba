#include <doctest.h>

#include <slh/identity.hpp>
#include <slh/rng.hpp>

#include "../support/fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <string>

using namespace slh;
using namespace testsupport;

namespace {

NetworkPepper counting_pepper() {
  NetworkPepper pepper;
  for (size_t i = 0; i < pepper.size(); ++i) pepper[i] = uint8_t(i);
  return pepper;
}

Pseudonym pseudonym_of(uint8_t fill) {
  Pseudonym p;
  p.fill(fill);
  return p;
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool contains_bytes(const Bytes& haystack, const std::string& needle) {
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

}  // namespace

TEST_CASE("pseudonym derivation is deterministic and peppered") {
  NetworkPepper pepper = counting_pepper();
  Bytes tpl{'f', 'i', 'x', 't', 'u', 'r', 'e', '-', 't', 'e',
            'm', 'p', 'l', 'a', 't', 'e', '-', '0', '0', '1'};

  Pseudonym p = derive_pseudonym(tpl, pepper);
  CHECK(to_hex(p.data(), p.size()) ==
        "81aac8d270a9498c6672745e0478e7754838db4e2a94a76a26ad41ae00340154");
  CHECK(derive_pseudonym(tpl, pepper) == p);

  NetworkPepper other = pepper;
  other[0] ^= 1;
  CHECK(derive_pseudonym(tpl, other) != p);

  Bytes tweaked = tpl;
  tweaked.back() ^= 1;
  CHECK(derive_pseudonym(tweaked, pepper) != p);

  CHECK_THROWS_WITH_AS(derive_pseudonym({}, pepper), "empty biometric template", Error);

  SUBCASE("no collisions over random templates") {
    DetRng rng(11);
    std::set<Pseudonym> seen;
    for (int i = 0; i < 2000; ++i) {
      Bytes t = rng.bytes(16 + size_t(rng.below(64)));
      CHECK(seen.insert(derive_pseudonym(t, pepper)).second);
    }
  }

  SUBCASE("shipped template fixtures derive distinct pseudonyms") {
    NetworkPepper flat;
    flat.fill(0x5A);
    Bytes a = read_file(std::string(SLH_FIXTURE_DIR) + "/templates/patient-a.tpl");
    Bytes b = read_file(std::string(SLH_FIXTURE_DIR) + "/templates/patient-b.tpl");
    Bytes c = read_file(std::string(SLH_FIXTURE_DIR) + "/templates/patient-c.tpl");
    CHECK(a.size() == 512);
    CHECK(b.size() == 480);
    CHECK(c.size() == 544);
    CHECK(to_hex(derive_pseudonym(a, flat).data(), 32) ==
          "abf232f748025184ce77fa58f0564d0996290b1eaf35cb571cf3786f15bd379b");
    CHECK(to_hex(derive_pseudonym(b, flat).data(), 32) ==
          "10cc2522e1a21543602407f0828753f892b7e917190e866b7725a7bee0fa7258");
    CHECK(to_hex(derive_pseudonym(c, flat).data(), 32) ==
          "b2be81c7508ce2ba0190ae45a42fd5eb8dd8254d17aa860a03ab044d6a8cf6c0");
  }
}

TEST_CASE("qr card payloads round trip through bytes and text") {
  NetworkPepper pepper = counting_pepper();
  Bytes tpl{'f', 'i', 'x', 't', 'u', 'r', 'e', '-', 't', 'e',
            'm', 'p', 'l', 'a', 't', 'e', '-', '0', '0', '1'};
  QrCardPayload card = issue_qr(derive_pseudonym(tpl, pepper),
                                facility_id_from_string("KILIMANI"), 1700000000);

  Bytes wire = card.serialize();
  CHECK(wire.size() == QrCardPayload::kWireSize);
  CHECK(to_hex(wire) ==
        "0181aac8d270a9498c6672745e0478e7754838db4e2a94a76a26ad41ae00340154"
        "4b494c494d414e49000000006553f100260d0034");

  QrCardPayload back = QrCardPayload::parse(wire);
  CHECK(back == card);
  CHECK(back.version == 1);
  CHECK(back.issue_date == 1700000000);

  SUBCASE("text encodings for card printers") {
    CHECK(card.to_hex_text() == to_hex(wire));
    CHECK(card.to_hex_text().size() == 106);
    std::string b32 = card.to_base32_text();
    CHECK(b32 ==
          "AGA2VSGSOCUUTDDGOJ2F4BDY452UQOG3JYVJJJ3KE2WUDLQAGQAVIS2JJREU2QKOJEAAAAAAMVJ7CABGBUADI===");
    CHECK(b32.size() == 88);

    CHECK(QrCardPayload::from_text(card.to_hex_text()) == card);
    CHECK(QrCardPayload::from_text(b32) == card);
    CHECK(QrCardPayload::from_text(" " + b32.substr(0, 40) + "\n" + b32.substr(40)) == card);
    std::string lower = b32;
    for (char& ch : lower) ch = char(std::tolower(uint8_t(ch)));
    CHECK(QrCardPayload::from_text(lower) == card);
    CHECK_THROWS_WITH_AS(QrCardPayload::from_text("not a card"),
                         "unrecognized card text encoding", Error);
  }

  SUBCASE("any single corrupted byte fails the checksum") {
    for (size_t pos = 0; pos < wire.size(); ++pos) {
      for (uint8_t delta : {uint8_t(0x01), uint8_t(0x80), uint8_t(0xff)}) {
        Bytes bent = wire;
        bent[pos] ^= delta;
        CHECK_THROWS_AS(QrCardPayload::parse(bent), Error);
      }
    }
    CHECK_THROWS_WITH_AS(QrCardPayload::parse(Bytes(52, 0)),
                         "card payload must be 53 bytes", Error);
    Bytes longer = wire;
    longer.push_back(0);
    CHECK_THROWS_AS(QrCardPayload::parse(longer), Error);
  }
}

TEST_CASE("family links enforce the guardian rules") {
  FamilyGraph g;
  Pseudonym child = pseudonym_of(1);
  Pseudonym mother = pseudonym_of(2);
  Pseudonym father = pseudonym_of(3);
  Pseudonym aunt = pseudonym_of(4);

  g.link(child, mother, Relation::mother);
  g.link(child, father, Relation::father);
  CHECK(g.size() == 2);
  CHECK(g.guardians_of(child) == std::vector<Pseudonym>{mother, father});
  CHECK(g.children_of(mother) == std::vector<Pseudonym>{child});

  auto house = g.household(child);
  CHECK(house == std::vector<Pseudonym>{child, mother, father});
  CHECK(g.household(mother) == house);  // same component, either entry point

  CHECK_THROWS_WITH_AS(g.link(child, aunt, Relation::guardian),
                       "guardian-limit: child already has two guardians", Error);
  CHECK_THROWS_WITH_AS(g.link(child, mother, Relation::guardian),
                       "family link already present", Error);

  SUBCASE("guardian chains may not loop") {
    CHECK_THROWS_WITH_AS(g.link(mother, child, Relation::guardian),
                         "cycle: guardian chain loops back to the child", Error);
    g.link(mother, aunt, Relation::guardian);  // child -> mother -> aunt is fine
    CHECK_THROWS_WITH_AS(g.link(aunt, child, Relation::guardian),
                         "cycle: guardian chain loops back to the child", Error);
    CHECK_THROWS_AS(g.link(aunt, aunt, Relation::guardian), Error);
    CHECK(g.household(aunt).size() == 4);
  }

  SUBCASE("graphs round trip and revalidate on load") {
    g.link(mother, aunt, Relation::guardian);
    Bytes data = g.serialize();
    FamilyGraph back = FamilyGraph::deserialize(data);
    CHECK(back.edges() == g.edges());

    // hand-built edge list with a loop never loads
    FamilyGraph loop;
    Bytes bad;
    put_u32be(bad, 2);
    auto push_edge = [&bad](const Pseudonym& c, const Pseudonym& gd) {
      bad.insert(bad.end(), c.begin(), c.end());
      bad.insert(bad.end(), gd.begin(), gd.end());
      bad.push_back(uint8_t(Relation::guardian));
    };
    push_edge(child, mother);
    push_edge(mother, child);
    CHECK_THROWS_WITH_AS(FamilyGraph::deserialize(bad),
                         "cycle: guardian chain loops back to the child", Error);

    Bytes truncated(data.begin(), data.end() - 1);
    CHECK_THROWS_AS(FamilyGraph::deserialize(truncated), Error);
  }

  SUBCASE("relations name themselves") {
    CHECK(std::string(to_string(Relation::mother)) == "mother");
    CHECK(relation_from_string("father") == Relation::father);
    CHECK_THROWS_AS(relation_from_string("cousin"), Error);
  }
}

TEST_CASE("demographic matching scores fields and flags uncertainty") {
  IdentityMappingStore store(2);
  store.put(pseudonym_of(1), {"AMINA JUMA", 1988, "VK-104"});
  store.put(pseudonym_of(2), {"AMINA JUMA", 1989, "VK-209"});
  store.put(pseudonym_of(3), {"JOSEPH OTIENO", 1971, "VK-104"});
  store.put(pseudonym_of(4), {"GRACE WANJIKU", 2004, "VK-550"});
  CHECK(store.size() == 4);
  CHECK(store.get(pseudonym_of(3))->birth_year == 1971);
  CHECK_FALSE(store.get(pseudonym_of(9)).has_value());

  SUBCASE("unique exact match is certain") {
    DemographicQuery q;
    q.name = "GRACE WANJIKU";
    q.birth_year = 2004;
    q.village_code = "VK-550";
    MatchResult r = demographic_match(q, store);
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.candidates[0].pseudonym == pseudonym_of(4));
    CHECK(r.candidates[0].score == 6);
    CHECK(r.candidates[0].exact);
    CHECK_FALSE(r.uncertain);
  }

  SUBCASE("equal scorers tie and stay uncertain") {
    DemographicQuery q;
    q.name = "AMINA JUMA";
    MatchResult r = demographic_match(q, store);
    REQUIRE(r.candidates.size() == 2);
    CHECK(r.candidates[0].score == 2);
    CHECK(r.candidates[1].score == 2);
    CHECK(r.candidates[0].pseudonym == pseudonym_of(1));  // tie broken by bytes
    CHECK(r.uncertain);
  }

  SUBCASE("a birth year off by one scores half and stays uncertain") {
    DemographicQuery q;
    q.birth_year = 1970;
    MatchResult r = demographic_match(q, store);
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.candidates[0].pseudonym == pseudonym_of(3));
    CHECK(r.candidates[0].score == 1);
    CHECK_FALSE(r.candidates[0].exact);
    CHECK(r.uncertain);
  }

  SUBCASE("ranking rewards more matched fields") {
    DemographicQuery q;
    q.name = "AMINA JUMA";
    q.birth_year = 1988;
    q.village_code = "VK-104";
    MatchResult r = demographic_match(q, store);
    REQUIRE(r.candidates.size() >= 2);
    CHECK(r.candidates[0].pseudonym == pseudonym_of(1));
    CHECK(r.candidates[0].score == 6);  // all three exact
    CHECK(r.candidates[1].pseudonym == pseudonym_of(2));
    CHECK(r.candidates[1].score == 3);  // name exact, year off by one
    CHECK_FALSE(r.uncertain);  // top is exact and alone at its score
  }

  SUBCASE("zero-score entries are dropped") {
    DemographicQuery q;
    q.name = "NOBODY HERE";
    MatchResult r = demographic_match(q, store);
    CHECK(r.candidates.empty());
    CHECK(r.uncertain);
  }

  SUBCASE("the tier partition gates the whole workflow") {
    IdentityMappingStore rural(1);
    CHECK_THROWS_WITH_AS(rural.put(pseudonym_of(1), {"X", 1990, "VK-1"}),
                         "identity mappings are not storable below tier 2", Error);
    CHECK(rural.size() == 0);
    CHECK_THROWS_AS(rural.serialize(), Error);
    DemographicQuery q;
    q.name = "AMINA JUMA";
    CHECK_THROWS_WITH_AS(demographic_match(q, rural),
                         "demographic search runs at tier 2 or higher", Error);
    CHECK_THROWS_AS(IdentityMappingStore::deserialize(store.serialize(), 1), Error);
  }

  SUBCASE("an empty query is refused") {
    CHECK_THROWS_WITH_AS(demographic_match({}, store), "empty demographic query", Error);
  }

  SUBCASE("mapping stores round trip") {
    IdentityMappingStore back = IdentityMappingStore::deserialize(store.serialize(), 3);
    CHECK(back.tier() == 3);
    CHECK(back.entries() == store.entries());
  }
}

TEST_CASE("node state keeps mappings off rural nodes") {
  DeviceRegistry registry;
  DeviceProfile dev = make_device(1);
  registry.add(dev);
  Ledger ledger(facility_id_from_string("KILIMANI"), &registry);
  for (uint64_t n = 1; n <= 3; ++n) {
    HealthRecord rec = make_record(n, ledger.facility());
    ledger.append_record(rec, sign_record(rec, dev));
  }

  const std::string sentinel_name = "ZULEKHA SENTINEL-7742";
  const std::string sentinel_village = "VK-SENTINEL-99";
  IdentityMappingStore mappings(2);
  mappings.put(pseudonym_of(7), {sentinel_name, 1984, sentinel_village});

  Bytes urban = serialize_node_state(2, ledger, &mappings);
  CHECK(contains_bytes(urban, sentinel_name));
  CHECK(contains_bytes(urban, sentinel_village));

  NodeState urban_back = parse_node_state(urban, &registry);
  CHECK(urban_back.tier == 2);
  CHECK(urban_back.ledger.size() == 3);
  CHECK(urban_back.ledger.root() == ledger.root());
  CHECK(urban_back.mappings.entries() == mappings.entries());

  SUBCASE("a rural save refuses mapping bytes end to end") {
    CHECK_THROWS_WITH_AS(serialize_node_state(1, ledger, &mappings),
                         "identity mappings are not storable below tier 2", Error);

    Bytes rural = serialize_node_state(1, ledger, nullptr);
    CHECK_FALSE(contains_bytes(rural, sentinel_name));
    CHECK_FALSE(contains_bytes(rural, sentinel_village));
    NodeState rural_back = parse_node_state(rural, &registry);
    CHECK(rural_back.tier == 1);
    CHECK(rural_back.ledger.size() == 3);
    CHECK(rural_back.mappings.size() == 0);
    CHECK(rural_back.mappings.tier() == 1);

    IdentityMappingStore empty(2);
    Bytes rural_empty = serialize_node_state(1, ledger, &empty);
    CHECK(rural_empty == rural);
  }

  SUBCASE("tier-1 bytes that smuggle mappings are rejected") {
    // splice the urban mapping section onto a tier-1 header by hand
    Bytes ledger_bytes = ledger.serialize();
    Bytes map_bytes = mappings.serialize();
    Bytes forged{'S', 'L', 'H', 'N', 'O', 'D', 'E', '1'};
    forged.push_back(1);
    put_u64be(forged, ledger_bytes.size());
    forged.insert(forged.end(), ledger_bytes.begin(), ledger_bytes.end());
    put_u64be(forged, map_bytes.size());
    forged.insert(forged.end(), map_bytes.begin(), map_bytes.end());
    CHECK_THROWS_WITH_AS(parse_node_state(forged, &registry),
                         "tier-1 state carries identity mappings", Error);
  }

  SUBCASE("junk is not a node state") {
    CHECK_THROWS_WITH_AS(parse_node_state(Bytes(40, 0x33), &registry),
                         "not a node state file", Error);
  }
}
