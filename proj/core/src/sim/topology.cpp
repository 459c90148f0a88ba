#include "slh/sim/topology.hpp"

#include "slh/sha256.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace slh {

const TierDefaults& tier_defaults(uint8_t tier) {
  // proof-search rates scale with the tier hardware's relative throughput;
  // tier 1 calibrated so difficulty (256, 256) takes ~12.5 s
  static const TierDefaults table[4] = {
      {785.0, 3.5},        // tier 0: mobile point, USB stick
      {5234.0, 13.0},      // tier 1: rural clinic
      {146552.0, 1372.0},  // tier 2: urban center
      {1151480.0, 3250.0}, // tier 3: regional hospital
  };
  if (tier > 3) throw Error(Errc::bad_argument, "tier must be 0..3");
  return table[tier];
}

std::vector<SyncWindow> schedule_windows(const WindowPattern& pattern,
                                         uint64_t days, uint64_t seed) {
  constexpr uint64_t kDay = 86'400;
  std::vector<SyncWindow> windows;
  if (pattern.continuous) {
    if (days > 0) windows.push_back({0, days * kDay});
    return windows;
  }
  if (pattern.per_day_min > pattern.per_day_max ||
      pattern.duration_min > pattern.duration_max || pattern.duration_max == 0 ||
      uint64_t(pattern.per_day_max) * pattern.duration_max > kDay) {
    throw Error(Errc::bad_argument, "infeasible window pattern");
  }
  DetRng rng(seed);
  for (uint64_t day = 0; day < days; ++day) {
    uint64_t count = uint64_t(rng.between(pattern.per_day_min, pattern.per_day_max));
    if (count == 0) continue;
    uint64_t slot = kDay / count;
    for (uint64_t i = 0; i < count; ++i) {
      uint64_t duration =
          uint64_t(rng.between(int64_t(pattern.duration_min), int64_t(pattern.duration_max)));
      uint64_t latest_start = slot - duration;  // slot >= 2 * duration_max / 2
      uint64_t start = day * kDay + i * slot + rng.below(latest_start + 1);
      windows.push_back({start, start + duration});
    }
  }
  return windows;
}

Simulator Simulator::build(const TopologySpec& spec) {
  if (spec.nodes.empty()) {
    throw Error(Errc::bad_argument, "malformed topology: no nodes");
  }

  uint8_t top_tier = 0;
  std::map<std::string, size_t> by_name;
  for (size_t i = 0; i < spec.nodes.size(); ++i) {
    const NodeSpec& n = spec.nodes[i];
    if (n.name.empty() || n.name.size() > 8 ||
        n.name.find_first_of(" \t\n,") != std::string::npos) {
      throw Error(Errc::bad_argument,
                  "malformed topology: node name must be 1..8 chars, no spaces or commas");
    }
    if (n.tier > 3) {
      throw Error(Errc::bad_argument, "malformed topology: tier must be 0..3");
    }
    if (!by_name.emplace(n.name, i).second) {
      throw Error(Errc::bad_argument,
                  "malformed topology: duplicate node " + n.name);
    }
    top_tier = std::max(top_tier, n.tier);
  }

  Simulator sim;
  sim.seed_ = spec.seed;
  sim.registry_ = std::make_unique<DeviceRegistry>();
  DetRng build_rng(spec.seed);

  for (const NodeSpec& n : spec.nodes) {
    sim.nodes_.emplace_back(n.name, facility_id_from_string(n.name),
                            sim.registry_.get());
    SimNode& node = sim.nodes_.back();
    node.tier = n.tier;
    node.uptime_hours = n.uptime_hours;

    DetRng rng = build_rng.substream(n.name);
    Digest256 name_digest = sha256(n.name);
    const TierDefaults& defaults = tier_defaults(n.tier);
    std::copy_n(name_digest.begin(), node.device.device_id.size(),
                node.device.device_id.begin());
    Bytes secret = rng.bytes(node.device.device_secret.size());
    std::copy(secret.begin(), secret.end(), node.device.device_secret.begin());
    node.device.nominal_hashrate = n.hashrate > 0 ? n.hashrate : defaults.hashrate;
    node.device.power_watts = n.power_watts > 0 ? n.power_watts : defaults.power_watts;
    node.device.tier = n.tier;
    node.device.validate();
    node.clock_skew = int32_t(rng.between(-30, 30));
    sim.registry_->add(node.device);
  }

  for (size_t i = 0; i < spec.nodes.size(); ++i) {
    const NodeSpec& n = spec.nodes[i];
    if (n.parent.empty()) {
      if (n.tier != top_tier) {
        throw Error(Errc::bad_argument,
                    "malformed topology: " + n.name + " has no parent");
      }
      continue;
    }
    auto it = by_name.find(n.parent);
    if (it == by_name.end()) {
      throw Error(Errc::bad_argument,
                  "malformed topology: unknown parent " + n.parent);
    }
    const NodeSpec& p = spec.nodes[it->second];
    if (p.tier != n.tier + 1) {
      throw Error(Errc::bad_argument,
                  "malformed topology: parent of " + n.name +
                      " must be one tier above");
    }
    if (n.uplink_bps < 9600 || n.uplink_bps > 14400) {
      throw Error(Errc::bad_argument,
                  "malformed topology: uplink bps outside 2G range");
    }
    sim.nodes_[i].parent = it->second;

    SimLink link;
    link.child = i;
    link.parent = it->second;
    link.shape.bits_per_second = n.uplink_bps;
    link.shape.loss_rate = n.uplink_loss;
    link.pattern = n.windows;
    link.continuous = n.windows.continuous || n.tier >= 2;
    sim.links_.push_back(std::move(link));
  }
  return sim;
}

SimNode* Simulator::find_node(std::string_view name) {
  for (auto& n : nodes_) {
    if (n.name == name) return &n;
  }
  return nullptr;
}

size_t Simulator::index_of(std::string_view name) const {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  throw Error(Errc::bad_argument, "unknown node " + std::string(name));
}

SyncEndpoint Simulator::endpoint(size_t i) {
  SimNode& n = nodes_.at(i);
  return {&n.ledger, &n.device, registry_.get(), &n.replay, &n.quarantine};
}

void charge_energy(SimNode& node, double active_seconds) {
  node.energy_joules += node.device.power_watts * active_seconds;
}

EnergyStats measure_proof_energy(const DeviceProfile& device, size_t n,
                                 const Difficulty& difficulty, uint64_t seed) {
  if (n == 0) throw Error(Errc::bad_argument, "need at least one sample");
  device.validate();
  double mean_attempts = double(difficulty.d) * double(difficulty.scale);
  double p = 1.0 / mean_attempts;
  double log_q = std::log1p(-p);

  DetRng rng(seed);
  EnergyStats stats;
  stats.samples = n;
  double sum_a = 0, sum_a2 = 0;
  for (size_t i = 0; i < n; ++i) {
    double attempts = 1.0;
    if (p < 1.0) {
      // geometric via inverse CDF; u in [0,1) keeps the log finite
      attempts = std::floor(std::log1p(-rng.real01()) / log_q) + 1.0;
    }
    sum_a += attempts;
    sum_a2 += attempts * attempts;
  }
  stats.mean_attempts = sum_a / double(n);
  double var = sum_a2 / double(n) - stats.mean_attempts * stats.mean_attempts;
  stats.attempts_cv = std::sqrt(std::max(var, 0.0)) / stats.mean_attempts;
  stats.mean_seconds = stats.mean_attempts / device.nominal_hashrate;
  stats.mean_joules = device.power_watts * stats.mean_seconds;
  stats.joules_cv = stats.attempts_cv;  // energy is a fixed multiple of attempts
  return stats;
}

}  // namespace slh
