#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

namespace fabricnet::sim {

// Deterministic discrete-event kernel. Events dispatch in (time, insertion
// sequence) order; the tie-break makes replays independent of container
// internals. Single-threaded per instance.
class EventQueue {
 public:
  using Handle = std::uint64_t;
  using EventFn = std::function<void()>;

  // Throws std::invalid_argument ("causality violation") if t < now().
  Handle schedule(double t, EventFn fn);

  // Removes a pending event; returns false if already dispatched or unknown.
  bool cancel(Handle h);

  // Dispatches every pending event with time <= t_end, including events the
  // handlers themselves schedule inside the horizon. Afterwards the clock
  // equals t_end. Returns the dispatch count.
  std::size_t run_until(double t_end);

  double now() const { return clock_; }
  std::size_t pending() const { return live_.size(); }

 private:
  struct Entry {
    double t;
    std::uint64_t seq;
    Handle id;
    bool operator>(const Entry& o) const {
      if (t != o.t) return t > o.t;
      return seq > o.seq;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
  std::unordered_map<Handle, EventFn> live_;
  double clock_ = 0.0;
  std::uint64_t next_seq_ = 0;
  Handle next_id_ = 1;
};

}  // namespace fabricnet::sim
