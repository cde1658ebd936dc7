#include "rtsim/time.hpp"

#include <charconv>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rtsim {

TimeNs parse_duration(std::string_view text) {
  if (text.empty()) {
    throw std::invalid_argument("empty duration");
  }
  std::size_t digits = 0;
  while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9') {
    ++digits;
  }
  if (digits == 0) {
    throw std::invalid_argument("duration must start with a digit: '" + std::string(text) + "'");
  }
  std::uint64_t magnitude = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + digits, magnitude);
  if (ec != std::errc{} || ptr != text.data() + digits) {
    throw std::invalid_argument("duration out of range: '" + std::string(text) + "'");
  }

  const std::string_view suffix = text.substr(digits);
  std::uint64_t scale = 1;
  if (suffix.empty() || suffix == "ns") {
    scale = 1;
  } else if (suffix == "us") {
    scale = kNsPerUs;
  } else if (suffix == "ms") {
    scale = kNsPerMs;
  } else if (suffix == "s") {
    scale = kNsPerS;
  } else {
    // covers "1.5ms" as well: fractional values are rejected, not rounded
    throw std::invalid_argument("bad duration suffix in '" + std::string(text) + "'");
  }

  constexpr auto kMax = static_cast<std::uint64_t>(std::numeric_limits<TimeNs>::max());
  if (magnitude > kMax / scale) {
    throw std::invalid_argument("duration out of range: '" + std::string(text) + "'");
  }
  return static_cast<TimeNs>(magnitude * scale);
}

std::string format_duration(TimeNs value) {
  if (value != 0) {
    if (value % kNsPerS == 0) return std::to_string(value / kNsPerS) + "s";
    if (value % kNsPerMs == 0) return std::to_string(value / kNsPerMs) + "ms";
    if (value % kNsPerUs == 0) return std::to_string(value / kNsPerUs) + "us";
  }
  return std::to_string(value) + "ns";
}

TimeNs lcm_capped(TimeNs a, TimeNs b, TimeNs cap) {
  const TimeNs g = std::gcd(a, b);
  const TimeNs step = a / g;
  if (step > cap / b) {
    return cap;
  }
  const TimeNs l = step * b;
  return l > cap ? cap : l;
}

}  // namespace rtsim
