#pragma once

#include "slh/common.hpp"

#include <functional>
#include <map>
#include <utility>

namespace slh {

// Discrete-event clock over simulated seconds. Events fire strictly in
// (time, insertion order), so a fixed schedule replays identically; there
// is no wall-clock coupling anywhere.
class EventQueue {
 public:
  using Handler = std::function<void()>;

  // Handlers may schedule further events at or after the current time.
  void schedule(uint64_t at, Handler fn);

  uint64_t now() const { return now_; }
  size_t pending() const { return events_.size(); }

  // Fires the earliest event; false when the queue is drained.
  bool run_next();

  // Fires everything scheduled at or before `horizon`, then parks the
  // clock there. Returns the number of events fired.
  size_t run_until(uint64_t horizon);

 private:
  uint64_t now_ = 0;
  uint64_t seq_ = 0;
  std::map<std::pair<uint64_t, uint64_t>, Handler> events_;
};

}  // namespace slh
