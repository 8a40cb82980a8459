#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <string_view>

#include "stacksim/engine/sim_time.hpp"

namespace stacksim::engine {

using StreamId = std::uint32_t;

/// One independent deterministic random sequence. The distribution helpers
/// are hand-rolled so draws are identical on every platform (the standard
/// library pins mt19937_64 but not the distributions on top of it).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform integer in [lo, hi], inclusive.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);

  /// Uniform double in [0, 1) with 53 bits of precision.
  double real01();

  bool chance(double p) { return real01() < p; }

  /// Exponentially distributed duration with the given mean.
  SimTime exponential(SimTime mean);

 private:
  std::mt19937_64 eng_;
};

/// Named per-module random streams derived from one global seed. Stream
/// sequences depend only on (seed, name), so adding a stream never perturbs
/// the existing ones.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed) {}

  /// Registers a stream name and returns its id. Registering the same name
  /// twice returns the same id.
  StreamId register_stream(std::string_view name);

  RandomStream& stream(StreamId id);

  /// Lookup by name; unknown names are fatal.
  RandomStream& stream(std::string_view name);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::deque<RandomStream> streams_;  // deque: references stay valid as streams register
  std::map<std::string, StreamId, std::less<>> by_name_;
};

}  // namespace stacksim::engine
