#include "stacksim/flash/geometry.hpp"

#include <stdexcept>
#include <string>

namespace stacksim::flash {

namespace {
// Pages 0..4 of every block run at LSB speed regardless of cell type.
constexpr std::uint32_t kLsbMetaPages = 5;
}  // namespace

const char* to_string(PageType t) {
  switch (t) {
    case PageType::Lsb: return "LSB";
    case PageType::Csb: return "CSB";
    case PageType::Msb: return "MSB";
  }
  return "?";
}

void FlashGeometry::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("FlashGeometry: ") + what);
  };
  require(channels >= 1, "channels must be >= 1");
  require(packages_per_channel >= 1, "packages_per_channel must be >= 1");
  require(dies_per_package >= 1, "dies_per_package must be >= 1");
  require(planes_per_die >= 1, "planes_per_die must be >= 1");
  require(blocks_per_plane >= 1, "blocks_per_plane must be >= 1");
  require(pages_per_block >= 1, "pages_per_block must be >= 1");
  require(page_size >= 1, "page_size must be >= 1");
  require(meta_pages < pages_per_block, "meta_pages must be < pages_per_block");
  require(bits_per_cell >= 1 && bits_per_cell <= 3, "bits_per_cell must be 1, 2, or 3");
}

std::uint32_t die_index(const FlashAddress& a, const FlashGeometry& g) {
  return (a.channel * g.packages_per_channel + a.package) * g.dies_per_package + a.die;
}

std::uint64_t block_index(const FlashAddress& a, const FlashGeometry& g) {
  const std::uint64_t die = die_index(a, g);
  return (die * g.planes_per_die + a.plane) * g.blocks_per_plane + a.block;
}

FlashAddress block_address(std::uint64_t block_idx, const FlashGeometry& g) {
  FlashAddress a;
  a.block = static_cast<std::uint32_t>(block_idx % g.blocks_per_plane);
  block_idx /= g.blocks_per_plane;
  a.plane = static_cast<std::uint32_t>(block_idx % g.planes_per_die);
  block_idx /= g.planes_per_die;
  a.die = static_cast<std::uint32_t>(block_idx % g.dies_per_package);
  block_idx /= g.dies_per_package;
  a.package = static_cast<std::uint32_t>(block_idx % g.packages_per_channel);
  a.channel = static_cast<std::uint32_t>(block_idx / g.packages_per_channel);
  return a;
}

std::uint64_t page_index(const FlashAddress& a, const FlashGeometry& g) {
  return block_index(a, g) * g.pages_per_block + a.page;
}

PageType classify_page(std::uint32_t page_in_block, const FlashGeometry& g) {
  if (page_in_block >= g.pages_per_block) {
    throw std::logic_error("classify_page: page index out of range");
  }
  if (g.bits_per_cell == 1) return PageType::Lsb;
  if (page_in_block < kLsbMetaPages && page_in_block < g.meta_pages) return PageType::Lsb;
  if (page_in_block < g.meta_pages) {
    // Remaining meta pages run at the second-fastest type the cell offers.
    return g.bits_per_cell == 3 ? PageType::Csb : PageType::Msb;
  }
  const std::uint32_t f = ((page_in_block - g.meta_pages) / g.planes_per_die) % g.bits_per_cell;
  if (f == 0) return PageType::Lsb;
  if (g.bits_per_cell == 2) return PageType::Msb;
  return f == 1 ? PageType::Csb : PageType::Msb;
}

void LatencyTable::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("LatencyTable: ") + what);
  };
  for (const SimTime v : read_ns) require(v > 0, "read latencies must be positive");
  for (const SimTime v : write_ns) require(v > 0, "write latencies must be positive");
  require(erase_ns > 0, "erase latency must be positive");
  require(write_ns[0] <= write_ns[1] && write_ns[1] <= write_ns[2],
          "write latencies must be ordered LSB <= CSB <= MSB");
}

SimTime op_latency(FlashOp op, PageType type, const LatencyTable& t) {
  switch (op) {
    case FlashOp::Read: return t.read_ns[static_cast<std::size_t>(type)];
    case FlashOp::Program: return t.write_ns[static_cast<std::size_t>(type)];
    case FlashOp::Erase: return t.erase_ns;
  }
  throw std::logic_error("op_latency: bad op");
}

}  // namespace stacksim::flash
