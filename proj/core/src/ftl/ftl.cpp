#include "stacksim/ftl/ftl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stacksim::ftl {

using flash::FlashAddress;
using flash::FlashOp;
using flash::PageType;

const char* to_string(AllocPolicy p) {
  switch (p) {
    case AllocPolicy::LatencyAware: return "latency_aware";
    case AllocPolicy::WritePoint: return "write_point";
    case AllocPolicy::Sequential: return "sequential";
  }
  return "?";
}

Ftl::Ftl(engine::Scheduler& sched, flash::FlashArray& flash, FtlConfig cfg)
    : sched_(sched), flash_(flash), cfg_(cfg) {
  const auto& g = flash_.geometry();
  const std::uint64_t n_blocks = g.total_blocks();
  const std::uint64_t user_pages = n_blocks * g.user_pages_per_block();
  if (cfg_.logical_pages == 0 || cfg_.logical_pages > user_pages) {
    throw std::invalid_argument("FtlConfig: logical_pages must be in [1, user pages] (got " +
                                std::to_string(cfg_.logical_pages) + ")");
  }
  if (cfg_.gc_trigger_free_fraction < 0.0 || cfg_.gc_trigger_free_fraction >= 1.0) {
    throw std::invalid_argument("FtlConfig: gc_trigger_free_fraction must be in [0, 1)");
  }
  reserved_blocks_ = static_cast<std::uint64_t>(
      std::ceil(cfg_.reserved_block_fraction * static_cast<double>(n_blocks)));
  if (reserved_blocks_ < 1) reserved_blocks_ = 1;
  if (reserved_blocks_ >= n_blocks) {
    throw std::invalid_argument("FtlConfig: reserved_block_fraction leaves no usable blocks");
  }

  blocks_.resize(n_blocks);
  for (auto& b : blocks_) b.next_free = g.meta_pages;
  page_state_.assign(g.total_pages(), PageState::Free);
  for (std::uint64_t blk = 0; blk < n_blocks; ++blk) {
    for (std::uint32_t p = 0; p < g.meta_pages; ++p) {
      page_state_[blk * g.pages_per_block + p] = PageState::Meta;
    }
  }
  lpn_to_ppn_.assign(cfg_.logical_pages, -1);
  ppn_to_lpn_.assign(g.total_pages(), -1);

  const std::uint32_t dies = g.total_dies();
  for (auto& per_type : groups_) per_type.resize(dies);
  free_pool_.resize(dies);
  const std::uint32_t blocks_per_die = g.blocks_per_die();
  for (std::uint32_t blk = 0; blk < n_blocks; ++blk) {
    free_pool_[blk / blocks_per_die].insert(blk);
  }
  free_total_ = n_blocks;
}

FlashAddress Ftl::page_address(std::uint32_t block_id, std::uint32_t page) const {
  FlashAddress a = flash::block_address(block_id, flash_.geometry());
  a.page = page;
  return a;
}

std::uint32_t Ftl::die_of_block(std::uint32_t block_id) const {
  return block_id / flash_.geometry().blocks_per_die();
}

std::optional<flash::FlashAddress> Ftl::translate(std::uint64_t lpn) const {
  if (lpn >= cfg_.logical_pages) throw std::logic_error("Ftl::translate: lpn out of range");
  const std::int64_t ppn = lpn_to_ppn_[lpn];
  if (ppn < 0) return std::nullopt;
  const auto& g = flash_.geometry();
  const std::uint32_t block_id = static_cast<std::uint32_t>(ppn / g.pages_per_block);
  return page_address(block_id, static_cast<std::uint32_t>(ppn % g.pages_per_block));
}

bool Ftl::can_open_block(bool gc_mode) const {
  return gc_mode ? free_total_ >= 1 : free_total_ > reserved_blocks_;
}

std::optional<std::uint32_t> Ftl::pick_free_on_die(std::uint32_t die) const {
  const auto& pool = free_pool_[die];
  std::optional<std::uint32_t> best;
  std::uint32_t best_erase = 0;
  for (const std::uint32_t blk : pool) {
    const std::uint32_t ec = blocks_[blk].erase_count;
    if (!best || ec < best_erase) {
      best = blk;
      best_erase = ec;
    }
  }
  return best;
}

std::uint32_t Ftl::wear_level_select_free() const {
  std::optional<std::uint32_t> best;
  std::uint32_t best_erase = 0;
  for (const auto& pool : free_pool_) {
    for (const std::uint32_t blk : pool) {
      const std::uint32_t ec = blocks_[blk].erase_count;
      if (!best || ec < best_erase || (ec == best_erase && blk < *best)) {
        best = blk;
        best_erase = ec;
      }
    }
  }
  if (!best) throw std::logic_error("wear_level_select_free: free pool is empty");
  return *best;
}

std::uint32_t Ftl::open_block_on_die(std::uint32_t die) {
  const auto blk = pick_free_on_die(die);
  if (!blk) throw std::logic_error("open_block_on_die: no free block on die");
  free_pool_[die].erase(*blk);
  --free_total_;
  BlockInfo& b = blocks_[*blk];
  b.in_free_pool = false;
  b.next_free = flash_.geometry().meta_pages;
  file_block(*blk);
  return *blk;
}

void Ftl::file_block(std::uint32_t block_id) {
  const BlockInfo& b = blocks_[block_id];
  if (b.next_free >= flash_.geometry().pages_per_block) return;  // full, not filed
  const PageType t = flash::classify_page(b.next_free, flash_.geometry());
  groups_[static_cast<std::size_t>(t)][die_of_block(block_id)].push_back(block_id);
}

void Ftl::unfile_block(std::uint32_t block_id) {
  const BlockInfo& b = blocks_[block_id];
  if (b.next_free >= flash_.geometry().pages_per_block) return;
  const PageType t = flash::classify_page(b.next_free, flash_.geometry());
  GroupList& list = groups_[static_cast<std::size_t>(t)][die_of_block(block_id)];
  auto it = std::find(list.begin(), list.end(), block_id);
  if (it == list.end()) throw std::logic_error("unfile_block: block missing from its group");
  list.erase(it);
}

FlashAddress Ftl::take_page(std::uint32_t block_id) {
  // Caller already removed the block from its group.
  BlockInfo& b = blocks_[block_id];
  const std::uint32_t page = b.next_free;
  if (page >= flash_.geometry().pages_per_block) {
    throw std::logic_error("take_page: block is full");
  }
  b.next_free = page + 1;
  file_block(block_id);
  return page_address(block_id, page);
}

void Ftl::mark_skipped(std::uint32_t block_id, std::uint32_t page, bool charge_budget) {
  const std::uint64_t ppn =
      static_cast<std::uint64_t>(block_id) * flash_.geometry().pages_per_block + page;
  if (page_state_[ppn] != PageState::Free) throw std::logic_error("mark_skipped: page not free");
  page_state_[ppn] = PageState::Invalid;
  BlockInfo& b = blocks_[block_id];
  b.invalid_count += 1;
  b.skipped_at_birth += 1;
  counters_.skipped_pages += 1;
  if (charge_budget) lsb_consumed_bytes_ += flash_.geometry().page_size;
}

std::optional<FlashAddress> Ftl::allocate_latency_aware_on(std::uint32_t die, WriteClass cls,
                                                           bool gc_mode) {
  const auto& g = flash_.geometry();
  auto take_front = [&](PageType t) -> FlashAddress {
    GroupList& list = groups_[static_cast<std::size_t>(t)][die];
    const std::uint32_t blk = list.front();
    list.pop_front();
    return take_page(blk);
  };

  if (cls == WriteClass::Foreground) {
    if (!groups_[static_cast<std::size_t>(PageType::Lsb)][die].empty()) {
      return take_front(PageType::Lsb);
    }
    if (can_open_block(gc_mode) && pick_free_on_die(die)) {
      const std::uint32_t blk = open_block_on_die(die);
      unfile_block(blk);
      return take_page(blk);
    }
    // LSB-ahead: advance past the CSB/MSB siblings of an open block, marking
    // them invalid at birth, provided the LSB-only budget covers them.
    for (const PageType t : {PageType::Csb, PageType::Msb}) {
      GroupList& list = groups_[static_cast<std::size_t>(t)][die];
      if (list.empty()) continue;
      const std::uint32_t blk = list.front();
      BlockInfo& b = blocks_[blk];
      std::uint32_t probe = b.next_free;
      while (probe < g.pages_per_block && flash::classify_page(probe, g) != PageType::Lsb) {
        ++probe;
      }
      if (probe >= g.pages_per_block) continue;  // no LSB page left in this block
      const std::uint64_t skip_cost =
          static_cast<std::uint64_t>(probe - b.next_free) * g.page_size;
      if (lsb_consumed_bytes_ + skip_cost > cfg_.lsb_cap_bytes) continue;
      list.pop_front();
      while (b.next_free < probe) {
        mark_skipped(blk, b.next_free, /*charge_budget=*/true);
        b.next_free += 1;
      }
      return take_page(blk);
    }
    // Budget exhausted (or nothing skippable): sequential in-block order.
    for (const PageType t : {PageType::Csb, PageType::Msb}) {
      GroupList& list = groups_[static_cast<std::size_t>(t)][die];
      if (!list.empty()) return take_front(t);
    }
    return std::nullopt;
  }

  // Background: prefer the alternating CSB/MSB side, fall back to the other,
  // then to LSB lists, then to opening a fresh block.
  const PageType pref = bg_type_pref_;
  const PageType other = pref == PageType::Csb ? PageType::Msb : PageType::Csb;
  for (const PageType t : {pref, other}) {
    if (!groups_[static_cast<std::size_t>(t)][die].empty()) {
      bg_type_pref_ = other == t ? pref : other;  // alternate on success
      return take_front(t);
    }
  }
  if (!groups_[static_cast<std::size_t>(PageType::Lsb)][die].empty()) {
    return take_front(PageType::Lsb);
  }
  if (can_open_block(gc_mode) && pick_free_on_die(die)) {
    const std::uint32_t blk = open_block_on_die(die);
    unfile_block(blk);
    return take_page(blk);
  }
  return std::nullopt;
}

FlashAddress Ftl::allocate_latency_aware(WriteClass cls, bool gc_mode) {
  const std::uint32_t dies = flash_.geometry().total_dies();
  std::uint32_t& cursor = cls == WriteClass::Foreground ? fg_die_cursor_ : bg_die_cursor_;
  for (std::uint32_t i = 0; i < dies; ++i) {
    const std::uint32_t die = (cursor + i) % dies;
    if (auto addr = allocate_latency_aware_on(die, cls, gc_mode)) {
      cursor = (die + 1) % dies;
      return *addr;
    }
  }
  throw DeviceFullError("latency-aware allocation found no free page");
}

void Ftl::ensure_point_block(bool gc_mode) {
  if (point_block_) return;
  const std::uint32_t dies = flash_.geometry().total_dies();
  if (!can_open_block(gc_mode)) throw DeviceFullError("no free block for the write point");
  for (std::uint32_t i = 0; i < dies; ++i) {
    const std::uint32_t die = (point_die_cursor_ + i) % dies;
    if (pick_free_on_die(die)) {
      point_block_ = open_block_on_die(die);
      point_die_cursor_ = (die + 1) % dies;
      return;
    }
  }
  throw DeviceFullError("no free block for the write point");
}

FlashAddress Ftl::allocate_point(WriteClass cls, bool skip_to_lsb, bool gc_mode) {
  const auto& g = flash_.geometry();
  const bool skip = skip_to_lsb && cls == WriteClass::Foreground;
  while (true) {
    ensure_point_block(gc_mode);
    const std::uint32_t blk = *point_block_;
    BlockInfo& b = blocks_[blk];
    unfile_block(blk);
    if (skip) {
      while (b.next_free < g.pages_per_block &&
             flash::classify_page(b.next_free, g) != PageType::Lsb) {
        mark_skipped(blk, b.next_free, /*charge_budget=*/false);
        b.next_free += 1;
      }
      if (b.next_free >= g.pages_per_block) {
        point_block_.reset();  // exhausted by skipping; rotate to the next die
        continue;
      }
    }
    const FlashAddress addr = take_page(blk);
    if (b.next_free >= g.pages_per_block) point_block_.reset();
    return addr;
  }
}

FlashAddress Ftl::allocate(WriteClass cls, bool gc_mode) {
  switch (cfg_.policy) {
    case AllocPolicy::LatencyAware:
      return allocate_latency_aware(cls, gc_mode);
    case AllocPolicy::WritePoint:
      return allocate_point(cls, /*skip_to_lsb=*/true, gc_mode);
    case AllocPolicy::Sequential:
      return allocate_point(cls, /*skip_to_lsb=*/false, gc_mode);
  }
  throw std::logic_error("allocate: bad policy");
}

void Ftl::map_page(std::uint64_t lpn, const FlashAddress& addr, bool count_as_gc) {
  const auto& g = flash_.geometry();
  const std::uint64_t ppn = flash::page_index(addr, g);
  const std::int64_t old = lpn_to_ppn_[lpn];
  if (old >= 0) {
    const std::uint32_t old_block = static_cast<std::uint32_t>(old / g.pages_per_block);
    if (page_state_[old] != PageState::Live) {
      throw std::logic_error("map_page: stale mapping is not live");
    }
    page_state_[old] = PageState::Invalid;
    blocks_[old_block].invalid_count += 1;
    blocks_[old_block].live_count -= 1;
    ppn_to_lpn_[old] = -1;
  }
  if (page_state_[ppn] != PageState::Free) throw std::logic_error("map_page: page not free");
  page_state_[ppn] = PageState::Live;
  blocks_[ppn / g.pages_per_block].live_count += 1;
  lpn_to_ppn_[lpn] = static_cast<std::int64_t>(ppn);
  ppn_to_lpn_[ppn] = static_cast<std::int64_t>(lpn);
  if (count_as_gc) {
    counters_.programmed_gc += 1;
  }
}

FlashAddress Ftl::program(std::uint64_t lpn, WriteClass cls, DoneFn done) {
  if (lpn >= cfg_.logical_pages) throw std::logic_error("Ftl::program: lpn out of range");
  FlashAddress addr;
  try {
    addr = allocate(cls, /*gc_mode=*/false);
  } catch (const DeviceFullError&) {
    if (garbage_collect() == 0) throw;
    addr = allocate(cls, /*gc_mode=*/false);  // retry once after reclaim
  }
  map_page(lpn, addr, /*count_as_gc=*/false);
  counters_.programmed_user += 1;
  flash_.submit_now(addr, FlashOp::Program, std::move(done));
  maybe_trigger_gc();
  return addr;
}

std::optional<FlashAddress> Ftl::program_on_die(std::uint64_t lpn, std::uint32_t die,
                                                WriteClass cls, DoneFn done) {
  if (lpn >= cfg_.logical_pages) throw std::logic_error("Ftl::program_on_die: lpn out of range");
  if (!can_direct_allocate()) return std::nullopt;
  auto addr = allocate_latency_aware_on(die, cls, /*gc_mode=*/false);
  if (!addr) return std::nullopt;
  map_page(lpn, *addr, /*count_as_gc=*/false);
  counters_.programmed_user += 1;
  flash_.submit_now(*addr, FlashOp::Program, std::move(done));
  maybe_trigger_gc();
  return addr;
}

std::uint32_t Ftl::next_die_hint(WriteClass cls) const {
  if (cfg_.policy == AllocPolicy::LatencyAware) {
    return cls == WriteClass::Foreground ? fg_die_cursor_ : bg_die_cursor_;
  }
  if (point_block_) return die_of_block(*point_block_);
  return point_die_cursor_;
}

void Ftl::precondition(std::uint64_t lpn_begin, std::uint64_t lpn_end) {
  if (lpn_end > cfg_.logical_pages || lpn_begin > lpn_end) {
    throw std::logic_error("Ftl::precondition: bad range");
  }
  for (std::uint64_t lpn = lpn_begin; lpn < lpn_end; ++lpn) {
    const FlashAddress addr = allocate_point(WriteClass::Background, false, /*gc_mode=*/false);
    map_page(lpn, addr, /*count_as_gc=*/false);
    counters_.preconditioned += 1;
  }
}

void Ftl::maybe_trigger_gc() {
  if (gc_active_) return;
  const double frac =
      static_cast<double>(free_total_) / static_cast<double>(blocks_.size());
  if (frac < cfg_.gc_trigger_free_fraction) garbage_collect();
}

std::uint64_t Ftl::garbage_collect() {
  if (gc_active_) return 0;
  const auto& g = flash_.geometry();
  std::optional<std::uint32_t> victim;
  for (std::uint32_t blk = 0; blk < blocks_.size(); ++blk) {
    const BlockInfo& b = blocks_[blk];
    if (b.in_free_pool || b.gc_victim || b.next_free < g.pages_per_block) continue;
    if (b.invalid_count == 0) continue;
    if (!victim || b.invalid_count > blocks_[*victim].invalid_count) victim = blk;
  }
  if (!victim) return 0;

  if (free_total_ == 0) {
    throw std::logic_error("garbage_collect: no reserved free block (reserve misconfigured)");
  }

  gc_active_ = true;
  gc_victim_block_ = *victim;
  counters_.gc_runs += 1;
  BlockInfo& vb = blocks_[*victim];
  vb.gc_victim = true;
  const std::uint64_t reclaimed = vb.invalid_count;

  // Rewrite live pages through background-class allocation now (mapping moves
  // immediately); the read -> program transaction chain carries the timing.
  const std::uint64_t base = static_cast<std::uint64_t>(*victim) * g.pages_per_block;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> copies;  // (page, lpn)
  for (std::uint32_t p = g.meta_pages; p < g.pages_per_block; ++p) {
    if (page_state_[base + p] == PageState::Live) {
      copies.emplace_back(p, static_cast<std::uint64_t>(ppn_to_lpn_[base + p]));
    }
  }
  gc_copy_pending_ = copies.size();
  const std::uint32_t victim_block = *victim;
  if (copies.empty()) {
    flash_.submit_now(page_address(victim_block, 0), FlashOp::Erase,
                      [this, victim_block](SimTime) { finish_gc_erase(victim_block); });
    return reclaimed;
  }
  for (const auto& [page, lpn] : copies) {
    FlashAddress dest;
    switch (cfg_.policy) {
      case AllocPolicy::LatencyAware:
        dest = allocate_latency_aware(WriteClass::Background, /*gc_mode=*/true);
        break;
      default:
        dest = allocate_point(WriteClass::Background, false, /*gc_mode=*/true);
        break;
    }
    map_page(lpn, dest, /*count_as_gc=*/true);
    counters_.gc_copies += 1;
    const FlashAddress src = page_address(victim_block, page);
    flash_.submit_now(src, FlashOp::Read, [this, dest, victim_block](SimTime) {
      flash_.submit_now(dest, FlashOp::Program, [this, victim_block](SimTime) {
        if (--gc_copy_pending_ == 0) {
          flash_.submit_now(page_address(victim_block, 0), FlashOp::Erase,
                            [this, victim_block](SimTime) { finish_gc_erase(victim_block); });
        }
      });
    });
  }
  return reclaimed;
}

void Ftl::finish_gc_erase(std::uint32_t victim) {
  const auto& g = flash_.geometry();
  BlockInfo& b = blocks_[victim];
  const std::uint64_t base = static_cast<std::uint64_t>(victim) * g.pages_per_block;
  for (std::uint32_t p = g.meta_pages; p < g.pages_per_block; ++p) {
    page_state_[base + p] = PageState::Free;
    ppn_to_lpn_[base + p] = -1;
  }
  // Skipped siblings return their LSB-budget charge once reclaimed.
  const std::uint64_t refund =
      static_cast<std::uint64_t>(b.skipped_at_birth) * g.page_size;
  lsb_consumed_bytes_ = lsb_consumed_bytes_ > refund ? lsb_consumed_bytes_ - refund : 0;
  b.skipped_at_birth = 0;
  b.invalid_count = 0;
  b.live_count = 0;
  b.next_free = g.meta_pages;
  b.erase_count += 1;
  b.in_free_pool = true;
  b.gc_victim = false;
  free_pool_[die_of_block(victim)].insert(victim);
  ++free_total_;
  counters_.erases += 1;
  gc_active_ = false;
  maybe_trigger_gc();
}

Ftl::BlockView Ftl::block_view(std::uint32_t block_id) const {
  const BlockInfo& b = blocks_[block_id];
  return BlockView{b.next_free, b.erase_count, b.invalid_count, b.live_count, b.in_free_pool};
}

std::vector<std::uint32_t> Ftl::group_blocks(PageType t, std::uint32_t die) const {
  const GroupList& list = groups_[static_cast<std::size_t>(t)][die];
  return {list.begin(), list.end()};
}

void Ftl::check_consistency() const {
  const auto& g = flash_.geometry();
  auto fail = [](const std::string& what) { throw std::logic_error("Ftl consistency: " + what); };

  // Re-derive the groups from block state and compare as sets.
  std::array<std::vector<std::vector<std::uint32_t>>, 3> derived;
  for (auto& per_type : derived) per_type.resize(g.total_dies());
  for (std::uint32_t blk = 0; blk < blocks_.size(); ++blk) {
    const BlockInfo& b = blocks_[blk];
    if (b.in_free_pool || b.gc_victim || b.next_free >= g.pages_per_block) continue;
    const PageType t = flash::classify_page(b.next_free, g);
    derived[static_cast<std::size_t>(t)][die_of_block(blk)].push_back(blk);
  }
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::uint32_t die = 0; die < g.total_dies(); ++die) {
      std::vector<std::uint32_t> have(groups_[t][die].begin(), groups_[t][die].end());
      std::vector<std::uint32_t> want = derived[t][die];
      std::sort(have.begin(), have.end());
      std::sort(want.begin(), want.end());
      if (have != want) fail("group list mismatch for type/die");
    }
  }

  // Per-block tallies against raw page states.
  std::uint64_t total_live = 0;
  for (std::uint32_t blk = 0; blk < blocks_.size(); ++blk) {
    const BlockInfo& b = blocks_[blk];
    const std::uint64_t base = static_cast<std::uint64_t>(blk) * g.pages_per_block;
    std::uint32_t live = 0, invalid = 0;
    for (std::uint32_t p = g.meta_pages; p < g.pages_per_block; ++p) {
      switch (page_state_[base + p]) {
        case PageState::Live: ++live; break;
        case PageState::Invalid: ++invalid; break;
        case PageState::Free:
          if (p < b.next_free) fail("free page below the block pointer");
          break;
        case PageState::Meta: fail("meta state on a user page"); break;
      }
    }
    if (live != b.live_count) fail("live_count tally mismatch");
    if (invalid != b.invalid_count) fail("invalid_count tally mismatch");
    total_live += live;
  }

  std::uint64_t mapped = 0;
  for (std::uint64_t lpn = 0; lpn < lpn_to_ppn_.size(); ++lpn) {
    const std::int64_t ppn = lpn_to_ppn_[lpn];
    if (ppn < 0) continue;
    ++mapped;
    if (page_state_[ppn] != PageState::Live) fail("mapped lpn points at a non-live page");
    if (ppn_to_lpn_[ppn] != static_cast<std::int64_t>(lpn)) fail("reverse map mismatch");
  }
  if (mapped != total_live) fail("live pages != mapped lpns");
  if (lsb_consumed_bytes_ > cfg_.lsb_cap_bytes) fail("LSB budget above cap");
}

}  // namespace stacksim::ftl
