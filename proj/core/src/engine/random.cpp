#include "stacksim/engine/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stacksim::engine {

namespace {

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t RandomStream::uniform(std::uint64_t lo, std::uint64_t hi) {
  if (lo > hi) throw std::logic_error("RandomStream::uniform: lo > hi");
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return next_u64();  // full 64-bit range
  // Rejection sampling keeps the draw unbiased and platform-identical.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % span + 1) % span;
  std::uint64_t v = next_u64();
  while (v > limit) v = next_u64();
  return lo + v % span;
}

double RandomStream::real01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

SimTime RandomStream::exponential(SimTime mean) {
  const double u = real01();
  const double d = -static_cast<double>(mean) * std::log(1.0 - u);
  return static_cast<SimTime>(d);
}

StreamId RandomSource::register_stream(std::string_view name) {
  if (auto it = by_name_.find(name); it != by_name_.end()) return it->second;
  const StreamId id = static_cast<StreamId>(streams_.size());
  streams_.emplace_back(splitmix64(seed_ ^ fnv1a(name)));
  by_name_.emplace(std::string(name), id);
  return id;
}

RandomStream& RandomSource::stream(StreamId id) {
  if (id >= streams_.size()) throw std::logic_error("RandomSource: unknown stream id");
  return streams_[id];
}

RandomStream& RandomSource::stream(std::string_view name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) {
    throw std::logic_error("RandomSource: unknown stream '" + std::string(name) + "'");
  }
  return streams_[it->second];
}

}  // namespace stacksim::engine
