#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stacksim/engine/scheduler.hpp"
#include "stacksim/flash/geometry.hpp"

namespace stacksim::flash {

/// Schedules flash transactions onto dies and channel buses. One transaction
/// executes per die at a time; the channel bus is held exclusively while a
/// page of data moves across it.
class FlashArray {
 public:
  using CompletionFn = std::function<void(SimTime)>;

  FlashArray(engine::Scheduler& sched, FlashGeometry geometry, LatencyTable latencies);

  /// Reserves die and channel time for the transaction and schedules its
  /// completion. Returns the completion time. `done` may be empty.
  SimTime submit(const FlashAddress& addr, FlashOp op, SimTime issue_time,
                 CompletionFn done = {});

  SimTime submit_now(const FlashAddress& addr, FlashOp op, CompletionFn done = {}) {
    return submit(addr, op, sched_.now(), std::move(done));
  }

  /// Dies with no executing or reserved transaction at `at`.
  std::vector<std::uint32_t> idle_dies(SimTime at) const;
  std::size_t idle_die_count(SimTime at) const;
  bool die_idle(std::uint32_t die, SimTime at) const;

  /// Fraction of [at - window, at] the die spent busy. `window` must be > 0.
  double die_busy_fraction(std::uint32_t die, SimTime at, SimTime window) const;

  SimTime die_busy_until(std::uint32_t die) const { return dies_[die].busy_until; }
  std::uint32_t die_inflight(std::uint32_t die) const { return dies_[die].inflight; }

  const FlashGeometry& geometry() const { return geometry_; }
  const LatencyTable& latencies() const { return latencies_; }

  struct Stats {
    std::uint64_t reads = 0;
    std::uint64_t programs = 0;
    std::uint64_t erases = 0;
  };
  const Stats& stats() const { return stats_; }

 private:
  struct DieState {
    SimTime busy_until = 0;
    std::uint32_t inflight = 0;
    // Busy-time log for the activity-fraction query, pruned as it ages out.
    std::vector<std::pair<SimTime, SimTime>> busy_log;
  };
  struct ChannelState {
    SimTime bus_free_at = 0;
  };

  engine::Scheduler& sched_;
  FlashGeometry geometry_;
  LatencyTable latencies_;
  std::vector<DieState> dies_;
  std::vector<ChannelState> channels_;
  Stats stats_;
};

}  // namespace stacksim::flash
