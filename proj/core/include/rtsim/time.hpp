#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace rtsim {

/// Simulation time and durations, in integer nanoseconds. Never negative
/// once validated; all arithmetic is exact.
using TimeNs = std::int64_t;

inline constexpr TimeNs kNsPerUs = 1'000;
inline constexpr TimeNs kNsPerMs = 1'000'000;
inline constexpr TimeNs kNsPerS = 1'000'000'000;

/// Parses "<integer>[ns|us|ms|s]" into nanoseconds. A bare integer is taken
/// as nanoseconds. Fractions, signs and overflow are rejected with
/// std::invalid_argument.
TimeNs parse_duration(std::string_view text);

/// Renders a duration with the largest suffix that divides it exactly.
std::string format_duration(TimeNs value);

/// Least common multiple, saturating at `cap` (returns cap when exceeded).
TimeNs lcm_capped(TimeNs a, TimeNs b, TimeNs cap);

}  // namespace rtsim
