#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "rtsim/model.hpp"

namespace rtsim {

enum class EventKind {
  JobRelease,
  JobComplete,
  CsRequest,
  CsAcquire,
  CsRelease,
  Suspend,
  Resume,
  Preempt,
  Dispatch,
  MigrateTo,
  MigrateBack,
  DeadlineCheck,
  OverheadBegin,
  OverheadEnd,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

/// Extra qualifier of an event: the overhead kind for OVERHEAD_BEGIN/END,
/// `miss` on DEADLINE_CHECK, `noop` on a migration to the current processor.
enum class EventDetail { None, Lock, Unlock, MigTo, MigBack, Ctx, Miss, Noop };

std::string_view to_string(EventDetail detail);
std::optional<EventDetail> parse_event_detail(std::string_view text);

struct Event {
  TimeNs time = 0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::JobRelease;
  TaskId task = 0;
  std::uint64_t job = 0;  // per-task job number, starting at 0
  ProcessorId processor = 0;
  std::optional<ResourceId> resource;
  std::optional<Priority> priority;
  EventDetail detail = EventDetail::None;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Engine-side record of one job. A cache: everything here can be
/// recomputed from the event list.
struct JobSummary {
  TaskId task = 0;
  std::uint64_t job = 0;
  TimeNs release = 0;
  TimeNs abs_deadline = 0;
  std::optional<TimeNs> completion;  // empty: censored at the horizon
  TimeNs executed = 0;
  TimeNs blocking = 0;  // suspended waiting plus spinning
  TimeNs overhead = 0;
  std::uint32_t migrations = 0;
  bool missed = false;

  friend bool operator==(const JobSummary&, const JobSummary&) = default;
};

/// Per-processor busy-time breakdown over [0, horizon].
struct ProcessorAccount {
  TimeNs execution = 0;
  TimeNs spin = 0;
  TimeNs overhead = 0;
  TimeNs idle = 0;

  TimeNs busy() const { return execution + spin + overhead; }
  friend bool operator==(const ProcessorAccount&, const ProcessorAccount&) = default;
};

struct Trace {
  Protocol protocol = Protocol::Mpcp;
  TimeNs horizon = 0;
  std::uint64_t fingerprint = 0;
  std::vector<Event> events;
  std::vector<JobSummary> jobs;
  std::vector<ProcessorAccount> processors;
};

/// Hash of (scenario, horizon, seed); stable across runs and platforms.
std::uint64_t fingerprint(const Scenario& scenario, TimeNs horizon, std::uint64_t seed);

}  // namespace rtsim
