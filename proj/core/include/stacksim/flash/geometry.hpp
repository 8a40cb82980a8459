#pragma once

#include <array>
#include <cstdint>

#include "stacksim/engine/sim_time.hpp"

namespace stacksim::flash {

enum class PageType : std::uint8_t { Lsb = 0, Csb = 1, Msb = 2 };

const char* to_string(PageType t);

/// Physical layout of the flash array. All counts are per parent unit.
struct FlashGeometry {
  std::uint32_t channels = 2;
  std::uint32_t packages_per_channel = 2;
  std::uint32_t dies_per_package = 2;
  std::uint32_t planes_per_die = 2;
  std::uint32_t blocks_per_plane = 256;
  std::uint32_t pages_per_block = 256;
  std::uint32_t page_size = 8192;
  /// Leading pages of every block reserved for firmware metadata.
  std::uint32_t meta_pages = 8;
  /// States per cell: 1 = SLC, 2 = MLC, 3 = TLC.
  std::uint32_t bits_per_cell = 3;

  /// Throws std::invalid_argument when any bound is inconsistent.
  void validate() const;

  std::uint32_t total_dies() const {
    return channels * packages_per_channel * dies_per_package;
  }
  std::uint32_t blocks_per_die() const { return planes_per_die * blocks_per_plane; }
  std::uint64_t total_blocks() const {
    return static_cast<std::uint64_t>(total_dies()) * blocks_per_die();
  }
  std::uint64_t total_pages() const { return total_blocks() * pages_per_block; }
  std::uint64_t capacity_bytes() const { return total_pages() * page_size; }
  std::uint32_t user_pages_per_block() const { return pages_per_block - meta_pages; }
};

/// Locates one physical flash page.
struct FlashAddress {
  std::uint32_t channel = 0;
  std::uint32_t package = 0;
  std::uint32_t die = 0;    // within package
  std::uint32_t plane = 0;  // within die
  std::uint32_t block = 0;  // within plane
  std::uint32_t page = 0;   // within block

  bool operator==(const FlashAddress&) const = default;
};

/// Global zero-based die index (channel-major).
std::uint32_t die_index(const FlashAddress& a, const FlashGeometry& g);

/// Global zero-based block index, and its inverse.
std::uint64_t block_index(const FlashAddress& a, const FlashGeometry& g);
FlashAddress block_address(std::uint64_t block_idx, const FlashGeometry& g);

/// Global zero-based physical page index.
std::uint64_t page_index(const FlashAddress& a, const FlashGeometry& g);

/// Maps an in-block page index to its cell type. The first five pages are
/// LSB-speed, the remaining meta pages run at the next slower type, and user
/// pages follow f(addr) = ((page - meta) / planes) mod states.
PageType classify_page(std::uint32_t page_in_block, const FlashGeometry& g);

/// Per-operation flash latencies in nanoseconds.
struct LatencyTable {
  std::array<SimTime, 3> read_ns{usec(58), usec(78), usec(107)};
  std::array<SimTime, 3> write_ns{usec(560), usec(2200), usec(5000)};
  SimTime erase_ns = usec(2270);
  /// Channel bus occupancy for moving one page of data.
  SimTime channel_xfer_ns = usec(20);

  void validate() const;
};

enum class FlashOp : std::uint8_t { Read, Program, Erase };

/// Pure lookup; erase ignores the page type.
SimTime op_latency(FlashOp op, PageType type, const LatencyTable& t);

}  // namespace stacksim::flash
