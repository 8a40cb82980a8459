#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <unordered_set>
#include <vector>

#include "stacksim/engine/sim_time.hpp"

namespace stacksim::engine {

enum class EventKind : std::uint8_t {
  RequestArrival,
  TransactionDone,
  FlushCheck,
  BufferDrain,
  Timer,
};

/// Identifies a scheduled event; doubles as the tie-break sequence number.
using EventId = std::uint64_t;

/// Single-threaded discrete-event core. Events fire in (fire_at, seq) order,
/// which is total and deterministic for a fixed input sequence.
///
/// Cancellation is by tombstone: cancelled events stay in the queue and are
/// discarded at dispatch time.
class Scheduler {
 public:
  using Callback = std::function<void()>;

  SimTime now() const { return now_; }

  /// Schedules `fn` at absolute time `fire_at`. Scheduling in the past is a
  /// logic error and throws.
  EventId schedule_at(SimTime fire_at, EventKind kind, Callback fn);

  EventId schedule_in(SimTime delay, EventKind kind, Callback fn) {
    return schedule_at(now_ + delay, kind, std::move(fn));
  }

  void cancel(EventId id);

  /// Dispatches every live event with fire_at <= limit, in order. Returns the
  /// number of events dispatched (cancelled events are not counted). Leaves
  /// now() == limit.
  std::uint64_t run_until(SimTime limit);

  /// Dispatches exactly one live event if any is pending; returns false when
  /// the queue is empty. Used by tests that need to single-step.
  bool step();

  bool empty() const { return pending_.empty(); }
  std::size_t pending_count() const { return pending_.size(); }
  std::uint64_t dispatched_count() const { return dispatched_; }

 private:
  struct Event {
    SimTime fire_at;
    EventId seq;
    EventKind kind;
    Callback fn;
  };

  struct LaterFirst {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  bool dispatch_next();
  void drop_cancelled_head();

  SimTime now_ = 0;
  EventId next_seq_ = 1;
  std::uint64_t dispatched_ = 0;
  std::priority_queue<Event, std::vector<Event>, LaterFirst> pending_;
  std::unordered_set<EventId> cancelled_;
};

}  // namespace stacksim::engine
