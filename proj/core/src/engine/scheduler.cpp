#include "stacksim/engine/scheduler.hpp"

#include <stdexcept>
#include <string>

namespace stacksim::engine {

EventId Scheduler::schedule_at(SimTime fire_at, EventKind kind, Callback fn) {
  if (fire_at < now_) {
    throw std::logic_error("Scheduler: event scheduled in the past (fire_at=" +
                           std::to_string(fire_at) + " now=" + std::to_string(now_) + ")");
  }
  const EventId id = next_seq_++;
  pending_.push(Event{fire_at, id, kind, std::move(fn)});
  return id;
}

void Scheduler::cancel(EventId id) {
  cancelled_.insert(id);
}

void Scheduler::drop_cancelled_head() {
  while (!pending_.empty()) {
    auto it = cancelled_.find(pending_.top().seq);
    if (it == cancelled_.end()) return;
    cancelled_.erase(it);
    pending_.pop();
  }
}

bool Scheduler::dispatch_next() {
  drop_cancelled_head();
  if (pending_.empty()) return false;
  Event ev = std::move(const_cast<Event&>(pending_.top()));
  pending_.pop();
  now_ = ev.fire_at;
  ++dispatched_;
  ev.fn();
  return true;
}

std::uint64_t Scheduler::run_until(SimTime limit) {
  if (limit < now_) {
    throw std::logic_error("Scheduler: run_until limit is in the past");
  }
  std::uint64_t steps = 0;
  while (true) {
    drop_cancelled_head();
    if (pending_.empty() || pending_.top().fire_at > limit) break;
    if (dispatch_next()) ++steps;
  }
  now_ = limit;
  return steps;
}

bool Scheduler::step() {
  return dispatch_next();
}

}  // namespace stacksim::engine
