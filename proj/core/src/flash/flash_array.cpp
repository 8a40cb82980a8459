#include "stacksim/flash/flash_array.hpp"

#include <algorithm>
#include <stdexcept>

namespace stacksim::flash {

FlashArray::FlashArray(engine::Scheduler& sched, FlashGeometry geometry, LatencyTable latencies)
    : sched_(sched), geometry_(geometry), latencies_(latencies) {
  geometry_.validate();
  latencies_.validate();
  dies_.resize(geometry_.total_dies());
  channels_.resize(geometry_.channels);
}

SimTime FlashArray::submit(const FlashAddress& addr, FlashOp op, SimTime issue_time,
                           CompletionFn done) {
  if (addr.channel >= geometry_.channels || addr.package >= geometry_.packages_per_channel ||
      addr.die >= geometry_.dies_per_package || addr.plane >= geometry_.planes_per_die ||
      addr.block >= geometry_.blocks_per_plane || addr.page >= geometry_.pages_per_block) {
    throw std::logic_error("FlashArray: address outside geometry");
  }
  if (issue_time < sched_.now()) {
    throw std::logic_error("FlashArray: transaction issued in the past");
  }

  const std::uint32_t die_id = die_index(addr, geometry_);
  DieState& die = dies_[die_id];
  ChannelState& channel = channels_[addr.channel];

  SimTime start = 0;
  SimTime completion = 0;
  if (op == FlashOp::Erase) {
    start = std::max(issue_time, die.busy_until);
    completion = start + latencies_.erase_ns;
    ++stats_.erases;
  } else {
    // Data-bearing ops hold the channel bus for one page transfer, then the
    // die for the array operation.
    start = std::max({issue_time, die.busy_until, channel.bus_free_at});
    channel.bus_free_at = start + latencies_.channel_xfer_ns;
    const PageType type = classify_page(addr.page, geometry_);
    completion = start + latencies_.channel_xfer_ns + op_latency(op, type, latencies_);
    if (op == FlashOp::Read) {
      ++stats_.reads;
    } else {
      ++stats_.programs;
    }
  }

  die.busy_until = completion;
  die.inflight += 1;
  die.busy_log.emplace_back(start, completion);
  if (die.busy_log.size() > 4096) {
    // Keep only the recent past; the activity query never looks further back.
    const SimTime horizon = sched_.now() > seconds(1) ? sched_.now() - seconds(1) : 0;
    std::erase_if(die.busy_log, [horizon](const auto& iv) { return iv.second < horizon; });
  }

  sched_.schedule_at(completion, engine::EventKind::TransactionDone,
                     [this, die_id, completion, done = std::move(done)]() {
                       dies_[die_id].inflight -= 1;
                       if (done) done(completion);
                     });
  return completion;
}

bool FlashArray::die_idle(std::uint32_t die, SimTime at) const {
  const DieState& d = dies_[die];
  return d.inflight == 0 && d.busy_until <= at;
}

std::vector<std::uint32_t> FlashArray::idle_dies(SimTime at) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t d = 0; d < dies_.size(); ++d) {
    if (die_idle(d, at)) out.push_back(d);
  }
  return out;
}

std::size_t FlashArray::idle_die_count(SimTime at) const {
  std::size_t n = 0;
  for (std::uint32_t d = 0; d < dies_.size(); ++d) {
    if (die_idle(d, at)) ++n;
  }
  return n;
}

double FlashArray::die_busy_fraction(std::uint32_t die, SimTime at, SimTime window) const {
  if (window == 0) throw std::logic_error("die_busy_fraction: window must be > 0");
  if (window > seconds(1)) throw std::logic_error("die_busy_fraction: window capped at 1s");
  const SimTime from = at > window ? at - window : 0;
  const SimTime span = at - from;
  if (span == 0) return 0.0;
  SimTime busy = 0;
  auto& log = const_cast<DieState&>(dies_[die]).busy_log;
  // Prune intervals that ended before the window.
  std::erase_if(log, [from](const auto& iv) { return iv.second < from; });
  for (const auto& [s, e] : log) {
    const SimTime lo = std::max(s, from);
    const SimTime hi = std::min(e, at);
    if (hi > lo) busy += hi - lo;
  }
  return static_cast<double>(busy) / static_cast<double>(span);
}

}  // namespace stacksim::flash
