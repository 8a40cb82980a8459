#pragma once

#include <cstdint>

namespace stacksim {

/// Virtual time in integer nanoseconds since simulation start.
using SimTime = std::uint64_t;

constexpr SimTime kNsPerUs = 1'000;
constexpr SimTime kNsPerMs = 1'000'000;
constexpr SimTime kNsPerSec = 1'000'000'000;

constexpr SimTime usec(std::uint64_t v) { return v * kNsPerUs; }
constexpr SimTime msec(std::uint64_t v) { return v * kNsPerMs; }
constexpr SimTime seconds(std::uint64_t v) { return v * kNsPerSec; }

/// Fractional seconds, rounded down to the nearest tick.
constexpr SimTime from_seconds(double s) {
  return static_cast<SimTime>(s * static_cast<double>(kNsPerSec));
}

}  // namespace stacksim
