#pragma once

#include "slh/common.hpp"

#include <map>
#include <optional>
#include <shared_mutex>

namespace slh {

using DeviceId = std::array<uint8_t, 8>;

// A simulated proof device. The secret stands in for the physical silicon
// characteristics a real ASIC would contribute; nominal_hashrate and
// power_watts drive the timing and energy model.
struct DeviceProfile {
  DeviceId device_id{};
  Digest256 device_secret{};
  double nominal_hashrate = 1.0;   // hashes per second
  double hashrate_cv = 0.08;       // per-proof jitter, coefficient of variation
  double power_watts = 1.0;
  int tier = 1;

  void validate() const {
    if (nominal_hashrate <= 0) throw Error(Errc::bad_argument, "nominal_hashrate must be positive");
    if (hashrate_cv < 0 || hashrate_cv >= 1) throw Error(Errc::bad_argument, "hashrate_cv must be in [0, 1)");
    if (power_watts <= 0) throw Error(Errc::bad_argument, "power_watts must be positive");
    if (tier < 0 || tier > 3) throw Error(Errc::bad_argument, "tier must be 0..3");
  }
};

DeviceId device_id_from_u64(uint64_t v);
DeviceId device_id_from_hex(std::string_view hex);

// Registry the verifier consults. Reads far outnumber writes, so lookups
// share a reader lock and registration takes the writer lock.
class DeviceRegistry {
 public:
  void add(const DeviceProfile& device);
  std::optional<DeviceProfile> find(const DeviceId& id) const;
  size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<DeviceId, DeviceProfile> devices_;
};

}  // namespace slh
