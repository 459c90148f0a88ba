#pragma once

#include "slh/rng.hpp"
#include "slh/sync.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slh {

// Per-tier hardware defaults. Hashrates here are effective proof-search
// rates (attempts per second), configuration inputs scaled so a tier-1
// clinic device lands near the reference proof time at difficulty
// (256, 256); they are deliberately not raw SHA-256 throughput figures.
struct TierDefaults {
  double hashrate;
  double power_watts;
};
const TierDefaults& tier_defaults(uint8_t tier);  // tiers 0..3

// Connectivity-window pattern for one uplink: how many windows per day and
// how long each stays open. Continuous links (tier 2 and up) are always on.
struct WindowPattern {
  uint32_t per_day_min = 2;
  uint32_t per_day_max = 3;
  uint64_t duration_min = 15 * 60;  // seconds
  uint64_t duration_max = 30 * 60;
  bool continuous = false;
};

// Draws non-overlapping windows for `days` simulated days, reproducible per
// seed: each day is split into equal slots, one window placed uniformly
// inside each slot. Throws Errc::bad_argument("infeasible window pattern")
// when the pattern cannot fit in a day.
std::vector<SyncWindow> schedule_windows(const WindowPattern& pattern,
                                         uint64_t days, uint64_t seed);

struct NodeSpec {
  std::string name;     // 1..8 printable chars, no spaces; doubles as facility id
  uint8_t tier = 1;
  std::string parent;   // empty only for nodes of the topology's top tier
  double hashrate = 0;      // 0 -> tier default
  double power_watts = 0;   // 0 -> tier default
  double uptime_hours = 8;  // daily duty cycle (solar budget)
  // uplink toward the parent
  uint32_t uplink_bps = 9600;  // 2G range [9600, 14400]
  double uplink_loss = 0.01;
  WindowPattern windows;
};

struct TopologySpec {
  std::vector<NodeSpec> nodes;
  uint64_t seed = 1;
};

struct SimNode {
  std::string name;
  uint8_t tier = 1;
  DeviceProfile device;
  Ledger ledger;
  std::optional<size_t> parent;  // node index
  int32_t clock_skew = 0;        // seconds, drawn from ±30
  double uptime_hours = 8;
  ReplayCache replay;
  std::vector<RecordId> quarantine;
  double energy_joules = 0;

  SimNode(std::string node_name, FacilityId facility, const DeviceRegistry* registry)
      : name(std::move(node_name)), ledger(facility, registry) {}
};

struct SimLink {
  size_t child = 0;
  size_t parent = 0;
  LinkShape shape;
  WindowPattern pattern;
  bool continuous = false;
  std::vector<SyncWindow> windows;  // filled by the scenario scheduler
};

// Four-tier hierarchy: every node below the topology's top tier uplinks to
// exactly one parent one tier above; links carry 2G bandwidth shaping and
// window schedules. Build is deterministic for a fixed spec.
class Simulator {
 public:
  static Simulator build(const TopologySpec& spec);

  size_t node_count() const { return nodes_.size(); }
  SimNode& node(size_t i) { return nodes_.at(i); }
  const SimNode& node(size_t i) const { return nodes_.at(i); }
  SimNode* find_node(std::string_view name);
  size_t index_of(std::string_view name) const;  // throws if absent

  std::vector<SimLink>& links() { return links_; }
  const std::vector<SimLink>& links() const { return links_; }

  const DeviceRegistry& registry() const { return *registry_; }
  uint64_t seed() const { return seed_; }

  SyncEndpoint endpoint(size_t i);

 private:
  Simulator() = default;

  std::unique_ptr<DeviceRegistry> registry_;
  std::deque<SimNode> nodes_;  // deque: nodes hold mutexes and never move
  std::vector<SimLink> links_;
  uint64_t seed_ = 1;
};

// Per-node energy bookkeeping: joules = power × active seconds.
void charge_energy(SimNode& node, double active_seconds);

// Statistics of the proof-work energy model: attempts sampled from the
// geometric law with mean d × scale, elapsed = attempts / hashrate,
// energy = power × elapsed. Sampling only; no hashing happens here.
struct EnergyStats {
  size_t samples = 0;
  double mean_attempts = 0;
  double attempts_cv = 0;
  double mean_seconds = 0;
  double mean_joules = 0;
  double joules_cv = 0;
};

EnergyStats measure_proof_energy(const DeviceProfile& device, size_t n,
                                 const Difficulty& difficulty, uint64_t seed);

}  // namespace slh
