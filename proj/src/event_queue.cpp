#include "fabricnet/event_queue.hpp"

#include <stdexcept>
#include <utility>

namespace fabricnet::sim {

EventQueue::Handle EventQueue::schedule(double t, EventFn fn) {
  if (t < clock_) throw std::invalid_argument("causality violation: event before clock");
  const Handle id = next_id_++;
  heap_.push(Entry{t, next_seq_++, id});
  live_.emplace(id, std::move(fn));
  return id;
}

bool EventQueue::cancel(Handle h) {
  return live_.erase(h) > 0;  // heap entry is skipped lazily on pop
}

std::size_t EventQueue::run_until(double t_end) {
  if (t_end < clock_) throw std::invalid_argument("causality violation: run_until before clock");
  std::size_t dispatched = 0;
  while (!heap_.empty() && heap_.top().t <= t_end) {
    const Entry e = heap_.top();
    heap_.pop();
    auto it = live_.find(e.id);
    if (it == live_.end()) continue;  // cancelled
    EventFn fn = std::move(it->second);
    live_.erase(it);
    clock_ = e.t;
    fn();
    ++dispatched;
  }
  clock_ = t_end;
  return dispatched;
}

}  // namespace fabricnet::sim
