#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "stacksim/engine/scheduler.hpp"
#include "stacksim/flash/flash_array.hpp"

namespace stacksim::ftl {

enum class AllocPolicy : std::uint8_t { LatencyAware, WritePoint, Sequential };
enum class WriteClass : std::uint8_t { Foreground, Background };

const char* to_string(AllocPolicy p);

/// Thrown when a write cannot be placed and garbage collection cannot
/// reclaim space right now. Callers that generate their own traffic (buffer
/// eviction) treat this as backpressure and retry.
struct DeviceFullError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FtlConfig {
  AllocPolicy policy = AllocPolicy::LatencyAware;
  std::uint64_t logical_pages = 0;
  /// GC starts when the free-block fraction drops below this.
  double gc_trigger_free_fraction = 0.05;
  /// Blocks held back from normal allocation so GC always has a destination.
  double reserved_block_fraction = 0.02;
  /// Cap on flash space consumed by sibling-skipping foreground allocation.
  std::uint64_t lsb_cap_bytes = 64ULL << 30;
};

enum class PageState : std::uint8_t { Meta, Free, Live, Invalid };

/// Address translation and physical page placement.
///
/// Three allocation policies are provided: a plain sequential filler, the
/// per-cursor "write point" scheme that skips slow pages for urgent writes
/// (wasting them), and the latency-aware scheme that groups blocks by the
/// type of their next free page, die-indexed, so urgent writes land on fast
/// LSB pages across dies while background writes fill the CSB/MSB pages.
///
/// State bookkeeping (mapping, page states, counters) is synchronous with the
/// call; flash transactions are scheduled for timing and completion callbacks.
class Ftl {
 public:
  using DoneFn = std::function<void(SimTime)>;

  Ftl(engine::Scheduler& sched, flash::FlashArray& flash, FtlConfig cfg);

  /// Live mapping lookup; miss for never-written pages.
  std::optional<flash::FlashAddress> translate(std::uint64_t lpn) const;

  /// Allocates a page under the configured policy, updates the mapping
  /// (invalidating any prior location), and submits the program transaction.
  /// Returns the chosen address. Throws DeviceFullError under exhaustion.
  flash::FlashAddress program(std::uint64_t lpn, WriteClass cls, DoneFn done = {});

  /// Directed variant used by idle-die eviction targeting; only the
  /// latency-aware policy can honor a die choice. Returns nullopt when the
  /// die has nothing allocatable.
  std::optional<flash::FlashAddress> program_on_die(std::uint64_t lpn, std::uint32_t die,
                                                    WriteClass cls, DoneFn done = {});

  bool can_direct_allocate() const { return cfg_.policy == AllocPolicy::LatencyAware; }

  /// The die the next undirected allocation of this class would target.
  std::uint32_t next_die_hint(WriteClass cls) const;

  /// Marks a logical range as already written, bypassing timing. Used to
  /// pre-fill a footprint so reads hit programmed flash pages.
  void precondition(std::uint64_t lpn_begin, std::uint64_t lpn_end);

  /// Free block with the minimum erase count (ties: lowest address).
  /// Throws when the pool is empty.
  std::uint32_t wear_level_select_free() const;

  /// Runs one collection cycle if a victim with invalid pages exists.
  /// Returns the number of pages reclaimed (invalid pages in the victim).
  std::uint64_t garbage_collect();

  struct Counters {
    std::uint64_t programmed_user = 0;
    std::uint64_t programmed_gc = 0;
    std::uint64_t skipped_pages = 0;  // invalid-at-birth CSB/MSB (and write-point skips)
    std::uint64_t preconditioned = 0;
    std::uint64_t erases = 0;
    std::uint64_t gc_runs = 0;
    std::uint64_t gc_copies = 0;
  };
  const Counters& counters() const { return counters_; }

  std::uint64_t lsb_budget_consumed() const { return lsb_consumed_bytes_; }
  std::uint64_t lsb_budget_cap() const { return cfg_.lsb_cap_bytes; }

  std::uint64_t free_block_count() const { return free_total_; }
  std::uint64_t total_blocks() const { return blocks_.size(); }
  std::uint64_t logical_pages() const { return cfg_.logical_pages; }
  const FtlConfig& config() const { return cfg_; }

  // --- introspection for tests and invariant checks ---

  PageState page_state(std::uint64_t global_page) const { return page_state_[global_page]; }
  PageState page_state(const flash::FlashAddress& a) const {
    return page_state_[flash::page_index(a, flash_.geometry())];
  }

  struct BlockView {
    std::uint32_t next_free;
    std::uint32_t erase_count;
    std::uint32_t invalid_count;
    std::uint32_t live_count;
    bool in_free_pool;
  };
  BlockView block_view(std::uint32_t block_id) const;

  /// Open blocks currently filed under (type, die), front first.
  std::vector<std::uint32_t> group_blocks(flash::PageType t, std::uint32_t die) const;

  /// Re-derives the groups from raw block state and checks them against the
  /// incremental lists, along with mapping and counter consistency. Throws
  /// std::logic_error on any mismatch.
  void check_consistency() const;

 private:
  struct BlockInfo {
    std::uint32_t next_free;      // next programmable page (== pages_per_block when full)
    std::uint32_t erase_count = 0;
    std::uint32_t invalid_count = 0;
    std::uint32_t live_count = 0;
    std::uint32_t skipped_at_birth = 0;  // refunded to the LSB budget on erase
    bool in_free_pool = true;
    bool gc_victim = false;
  };

  using GroupList = std::deque<std::uint32_t>;

  flash::FlashAddress page_address(std::uint32_t block_id, std::uint32_t page) const;
  std::uint32_t die_of_block(std::uint32_t block_id) const;

  bool can_open_block(bool gc_mode) const;
  std::uint32_t open_block_on_die(std::uint32_t die);  // caller checked availability
  std::optional<std::uint32_t> pick_free_on_die(std::uint32_t die) const;

  void file_block(std::uint32_t block_id);    // insert into group for its next_free type
  void unfile_block(std::uint32_t block_id);  // remove from its current group

  /// Takes block's next_free page (must be Free), advances the pointer, and
  /// refiles the block. Caller sets the page state afterwards.
  flash::FlashAddress take_page(std::uint32_t block_id);

  void mark_skipped(std::uint32_t block_id, std::uint32_t page, bool charge_budget);

  flash::FlashAddress allocate(WriteClass cls, bool gc_mode);
  std::optional<flash::FlashAddress> allocate_latency_aware_on(std::uint32_t die, WriteClass cls,
                                                               bool gc_mode);
  flash::FlashAddress allocate_latency_aware(WriteClass cls, bool gc_mode);
  flash::FlashAddress allocate_point(WriteClass cls, bool skip_to_lsb, bool gc_mode);
  void ensure_point_block(bool gc_mode);

  void map_page(std::uint64_t lpn, const flash::FlashAddress& addr, bool count_as_gc);
  void maybe_trigger_gc();
  void finish_gc_erase(std::uint32_t victim);

  engine::Scheduler& sched_;
  flash::FlashArray& flash_;
  FtlConfig cfg_;

  std::vector<BlockInfo> blocks_;
  std::vector<PageState> page_state_;            // global page index
  std::vector<std::int64_t> lpn_to_ppn_;         // -1 = unmapped
  std::vector<std::int64_t> ppn_to_lpn_;         // -1 = none
  // groups_[type][die] — open blocks whose next free page classifies to type.
  std::array<std::vector<GroupList>, 3> groups_;
  std::vector<std::set<std::uint32_t>> free_pool_;  // per die, ordered by block id
  std::uint64_t free_total_ = 0;
  std::uint64_t reserved_blocks_ = 0;

  std::uint32_t fg_die_cursor_ = 0;
  std::uint32_t bg_die_cursor_ = 0;
  flash::PageType bg_type_pref_ = flash::PageType::Csb;

  // Shared cursor for the write-point and sequential policies: one active
  // block, rotating to the next die at block granularity.
  std::optional<std::uint32_t> point_block_;
  std::uint32_t point_die_cursor_ = 0;

  std::uint64_t lsb_consumed_bytes_ = 0;
  bool gc_active_ = false;
  std::uint64_t gc_copy_pending_ = 0;
  std::uint32_t gc_victim_block_ = 0;

  Counters counters_;
};

}  // namespace stacksim::ftl
