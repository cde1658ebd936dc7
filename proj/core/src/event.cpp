#include "rtsim/event.hpp"

#include <array>
#include <string>

#include "rtsim/config_io.hpp"

namespace rtsim {

namespace {

constexpr std::array<std::string_view, 14> kKindNames = {
    "JOB_RELEASE", "JOB_COMPLETE", "CS_REQUEST",    "CS_ACQUIRE",    "CS_RELEASE",
    "SUSPEND",     "RESUME",       "PREEMPT",       "DISPATCH",      "MIGRATE_TO",
    "MIGRATE_BACK", "DEADLINE_CHECK", "OVERHEAD_BEGIN", "OVERHEAD_END",
};

constexpr std::array<std::string_view, 8> kDetailNames = {
    "", "lock", "unlock", "mig_to", "mig_bk", "ctx", "miss", "noop",
};

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<EventKind> parse_event_kind(std::string_view text) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(EventDetail detail) {
  return kDetailNames.at(static_cast<std::size_t>(detail));
}

std::optional<EventDetail> parse_event_detail(std::string_view text) {
  for (std::size_t i = 0; i < kDetailNames.size(); ++i) {
    if (kDetailNames[i] == text) return static_cast<EventDetail>(i);
  }
  return std::nullopt;
}

std::uint64_t fingerprint(const Scenario& scenario, TimeNs horizon, std::uint64_t seed) {
  // FNV-1a, 64 bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(serialize_scenario(scenario));
  feed("|horizon=" + std::to_string(horizon));
  feed("|seed=" + std::to_string(seed));
  return h;
}

}  // namespace rtsim
