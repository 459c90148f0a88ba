#include <doctest.h>

#include <slh/proof.hpp>

#include <cmath>
#include <numeric>

using namespace slh;

namespace {

DeviceProfile test_device(uint64_t id, uint8_t secret_fill = 0x42) {
  DeviceProfile dev;
  dev.device_id = device_id_from_u64(id);
  dev.device_secret.fill(secret_fill);
  dev.nominal_hashrate = 5000.0;
  dev.power_watts = 13.0;
  dev.tier = 1;
  return dev;
}

Digest256 digest_of_byte(uint8_t b) { return sha256(&b, 1); }

}  // namespace

TEST_CASE("device commitment is deterministic and device-bound") {
  DeviceProfile a = test_device(1, 0x11), b = test_device(2, 0x22);
  Digest256 rec = digest_of_byte(7);

  CHECK(device_commitment(a, rec) == device_commitment(a, rec));
  CHECK(device_commitment(a, rec) != device_commitment(b, rec));

  // flipping any record bit moves the commitment
  for (int bit = 0; bit < 100; ++bit) {
    Digest256 mutated = rec;
    mutated[bit % 32] ^= uint8_t(1 << (bit / 32 % 8));
    CHECK(device_commitment(a, mutated) != device_commitment(a, rec));
  }
}

TEST_CASE("trivial difficulty accepts the first nonce") {
  DeviceProfile dev = test_device(3);
  DetRng rng(1);
  auto [proof, timing] = generate_proof(dev, digest_of_byte(9), {1, 1}, 1700000000, rng);
  CHECK(proof.header.nonce == 0);
  CHECK(timing.attempts == 1);
  CHECK(proof.header.timestamp == 1700000000);
}

TEST_CASE("proof generation is deterministic for fixed inputs") {
  DeviceProfile dev = test_device(4);
  Digest256 rec = digest_of_byte(1);
  DetRng r1(5), r2(6);  // rng only affects timing, not the search
  auto [p1, t1] = generate_proof(dev, rec, {32, 32}, 1000, r1);
  auto [p2, t2] = generate_proof(dev, rec, {32, 32}, 1000, r2);
  CHECK(p1.header.nonce == p2.header.nonce);
  CHECK(p1.proof_hash == p2.proof_hash);
  CHECK(t1.attempts == t2.attempts);
}

TEST_CASE("round-trip verification accepts generated proofs") {
  DeviceRegistry registry;
  DeviceProfile dev = test_device(5);
  registry.add(dev);
  DetRng rng(7);

  for (int i = 0; i < 200; ++i) {
    Digest256 rec = digest_of_byte(uint8_t(i));
    auto [proof, timing] = generate_proof(dev, rec, {16, 16}, 1000 + i, rng);
    CHECK(verify_proof(proof, rec, registry) == ProofVerdict::ok);
    CHECK(timing.attempts == proof.header.nonce + 1);
  }
}

TEST_CASE("verification reports the first failed check") {
  DeviceRegistry registry;
  DeviceProfile dev = test_device(6);
  registry.add(dev);
  DetRng rng(8);
  Digest256 rec = digest_of_byte(20), other = digest_of_byte(21);
  auto [proof, timing] = generate_proof(dev, rec, {16, 16}, 2000, rng);

  SUBCASE("wrong expected record is a stale binding") {
    CHECK(verify_proof(proof, other, registry) == ProofVerdict::stale_binding);
  }
  SUBCASE("tampered proof hash") {
    DhfProof bad = proof;
    bad.proof_hash[0] ^= 0x01;
    CHECK(verify_proof(bad, rec, registry) == ProofVerdict::bad_hash);
  }
  SUBCASE("claiming a higher difficulty than the work supports") {
    DetRng r(9);
    auto [easy, et] = generate_proof(dev, rec, {1, 1}, 2000, r);
    DhfProof inflated = easy;
    inflated.difficulty = {uint64_t(1) << 32, uint64_t(1) << 32};
    CHECK(verify_proof(inflated, rec, registry) == ProofVerdict::insufficient_work);
  }
  SUBCASE("unregistered device") {
    DeviceRegistry empty;
    CHECK(verify_proof(proof, rec, empty) == ProofVerdict::unknown_device);
  }
  SUBCASE("registered device with a different secret") {
    DeviceRegistry other_reg;
    other_reg.add(test_device(6, 0x99));  // same id, different secret
    CHECK(verify_proof(proof, rec, other_reg) == ProofVerdict::bad_commitment);
  }
}

TEST_CASE("proof wire format is 136 bytes and round-trips") {
  DeviceProfile dev = test_device(7);
  DetRng rng(10);
  Digest256 rec = digest_of_byte(30);
  auto [proof, timing] = generate_proof(dev, rec, {8, 8}, 1234567, rng);

  Bytes wire = proof.serialize();
  REQUIRE(wire.size() == DhfProof::kWireSize);
  CHECK(proof.header.serialize().size() == ProofHeader::kWireSize);

  DhfProof back = DhfProof::deserialize(wire);
  CHECK(back.header.record_digest == proof.header.record_digest);
  CHECK(back.header.device_id == proof.header.device_id);
  CHECK(back.header.nonce == proof.header.nonce);
  CHECK(back.difficulty == proof.difficulty);
  CHECK(back.proof_hash == proof.proof_hash);

  // field offsets are load-bearing for interop: nonce occupies the last 8
  // header bytes, difficulty and hash follow
  CHECK(get_u64be(wire.data() + 80) == proof.header.nonce);
  CHECK(get_u64be(wire.data() + 88) == proof.difficulty.d);
  CHECK(get_u64be(wire.data() + 96) == proof.difficulty.scale);

  Bytes short_wire(wire.begin(), wire.end() - 1);
  CHECK_THROWS_AS(DhfProof::deserialize(short_wire), Error);
}

TEST_CASE("attempt counts follow the geometric model") {
  DeviceProfile dev = test_device(8);
  DetRng rng(11);
  Difficulty diff{16, 16};  // mean 256

  const int n = 2000;
  std::vector<double> attempts;
  attempts.reserve(n);
  DetRng recs(12);
  for (int i = 0; i < n; ++i) {
    Bytes r = recs.bytes(32);
    Digest256 rec;
    std::memcpy(rec.data(), r.data(), 32);
    auto [proof, timing] = generate_proof(dev, rec, diff, 0, rng);
    attempts.push_back(double(timing.attempts));
  }

  double mean = std::accumulate(attempts.begin(), attempts.end(), 0.0) / n;
  double var = 0;
  for (double a : attempts) var += (a - mean) * (a - mean);
  var /= n - 1;
  double cv = std::sqrt(var) / mean;

  CHECK(mean == doctest::Approx(256.0).epsilon(0.05));
  double geo_cv = std::sqrt(1.0 - 1.0 / 256.0);
  CHECK(cv / geo_cv > 0.9);
  CHECK(cv / geo_cv < 1.1);
}

TEST_CASE("energy accounting") {
  ProofTiming forced = ProofTiming::from_elapsed(12345, 12.52, 13.0);
  CHECK(forced.energy_joules == doctest::Approx(162.76).epsilon(1e-12));

  // summed per-proof energy equals power times summed elapsed
  DeviceProfile dev = test_device(9);
  DetRng rng(13);
  double sum_energy = 0, sum_elapsed = 0;
  for (int i = 0; i < 100; ++i) {
    auto [proof, timing] = generate_proof(dev, digest_of_byte(uint8_t(i)), {8, 8}, 0, rng);
    sum_energy += timing.energy_joules;
    sum_elapsed += timing.elapsed_seconds;
  }
  CHECK(sum_energy == doctest::Approx(dev.power_watts * sum_elapsed).epsilon(1e-9));
}
