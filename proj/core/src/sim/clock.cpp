#include "slh/sim/clock.hpp"

namespace slh {

void EventQueue::schedule(uint64_t at, Handler fn) {
  if (at < now_) throw Error(Errc::bad_argument, "event scheduled in the past");
  events_.emplace(std::pair{at, seq_++}, std::move(fn));
}

bool EventQueue::run_next() {
  if (events_.empty()) return false;
  auto it = events_.begin();
  now_ = it->first.first;
  Handler fn = std::move(it->second);
  events_.erase(it);
  fn();
  return true;
}

size_t EventQueue::run_until(uint64_t horizon) {
  size_t fired = 0;
  while (!events_.empty() && events_.begin()->first.first <= horizon) {
    run_next();
    ++fired;
  }
  if (now_ < horizon) now_ = horizon;
  return fired;
}

}  // namespace slh
