#include "slh/device.hpp"

#include <mutex>

namespace slh {

DeviceId device_id_from_u64(uint64_t v) {
  DeviceId id;
  for (int i = 0; i < 8; ++i) id[i] = uint8_t(v >> (56 - 8 * i));
  return id;
}

DeviceId device_id_from_hex(std::string_view hex) {
  Bytes raw = from_hex(hex);
  if (raw.size() != 8) throw Error(Errc::parse_error, "device id must be 8 bytes");
  DeviceId id;
  std::memcpy(id.data(), raw.data(), 8);
  return id;
}

void DeviceRegistry::add(const DeviceProfile& device) {
  device.validate();
  std::unique_lock lock(mutex_);
  devices_[device.device_id] = device;
}

std::optional<DeviceProfile> DeviceRegistry::find(const DeviceId& id) const {
  std::shared_lock lock(mutex_);
  auto it = devices_.find(id);
  if (it == devices_.end()) return std::nullopt;
  return it->second;
}

size_t DeviceRegistry::size() const {
  std::shared_lock lock(mutex_);
  return devices_.size();
}

}  // namespace slh
