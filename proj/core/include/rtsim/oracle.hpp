#pragma once

#include <stdexcept>
#include <string>

#include "rtsim/event.hpp"
#include "rtsim/model.hpp"

namespace rtsim {

/// Size limits of the brute-force oracle.
struct OracleGuard {
  std::size_t max_tasks = 4;
  std::size_t max_resources = 2;
  TimeNs max_horizon = 100'000;
};

class OracleGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Describes why `scenario`/`horizon` exceed `guard`, or empty when they fit.
std::string guard_violation(const Scenario& scenario, TimeNs horizon, const OracleGuard& guard = {});

/// Reference simulator that advances in 1 ns ticks and re-evaluates every
/// rule from scratch with linear scans. Shares no scheduling or locking
/// code with `run()`; it exists to cross-check it. Throws OracleGuardError
/// for instances beyond the guard.
Trace step_oracle(const Scenario& scenario, TimeNs horizon, const OracleGuard& guard = {});

/// Event list reduced to the fields both simulators must agree on
/// (sequence numbers dropped).
struct NormalizedEvent {
  TimeNs time;
  EventKind kind;
  TaskId task;
  std::uint64_t job;
  ProcessorId processor;
  std::optional<ResourceId> resource;
  std::optional<Priority> priority;
  EventDetail detail;
  friend bool operator==(const NormalizedEvent&, const NormalizedEvent&) = default;
};

std::vector<NormalizedEvent> normalize(const Trace& trace);

/// First difference between two traces as human readable text, or empty
/// when the normalized event lists and processor accounts are identical.
std::string diff_traces(const Trace& engine, const Trace& oracle);

}  // namespace rtsim
