#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rtsim/event.hpp"
#include "rtsim/model.hpp"

namespace rtsim {

// Per-job decomposition of the response time, rebuilt from the event list.
// Every instant between release and completion falls in exactly one bucket:
//
//   execution     running its own code (non-critical or critical)
//   overhead      running an injected overhead slice
//   blocking      suspended on a resource, spinning, ready on a
//                 synchronization processor but not running, or ready while
//                 a job of less urgent base priority runs on its processor
//   interference  ready while a job of more urgent base priority runs
//   idle_wait     released but queued behind an unfinished earlier job of
//                 the same task
//
// so execution + overhead + blocking + interference + idle_wait equals the
// response time. `suspended` and `spinning` are the parts of `blocking`
// spent waiting for a resource.
struct JobMetrics {
  TaskId task = 0;
  std::uint64_t job = 0;
  TimeNs release = 0;
  TimeNs abs_deadline = 0;
  std::optional<TimeNs> completion;
  TimeNs execution = 0;
  TimeNs overhead = 0;
  TimeNs blocking = 0;
  TimeNs interference = 0;
  TimeNs idle_wait = 0;
  TimeNs suspended = 0;
  TimeNs spinning = 0;
  std::uint32_t migrations = 0;
  bool missed = false;

  std::optional<TimeNs> response() const {
    return completion ? std::optional<TimeNs>(*completion - release) : std::nullopt;
  }
  TimeNs accounted() const { return execution + overhead + blocking + interference + idle_wait; }

  friend bool operator==(const JobMetrics&, const JobMetrics&) = default;
};

/// Replays the event list. `scenario` supplies processor roles only.
/// Jobs come back ordered by (release, task), like Trace::jobs.
struct Replay {
  std::vector<JobMetrics> jobs;
  std::vector<ProcessorAccount> processors;
};

Replay replay(const Trace& trace, const Scenario& scenario);

/// Nearest-rank percentile of an unsorted sample, q in (0, 100].
/// Empty input gives nullopt.
std::optional<TimeNs> percentile(std::vector<TimeNs> samples, double q);

struct Distribution {
  std::size_t count = 0;
  TimeNs min = 0;
  TimeNs max = 0;
  double avg = 0.0;
  TimeNs p50 = 0;
  TimeNs p90 = 0;
  TimeNs p99 = 0;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

Distribution describe(const std::vector<TimeNs>& samples);

struct TaskStats {
  TaskId task = 0;
  std::size_t jobs = 0;      // completed
  std::size_t censored = 0;  // unfinished at the horizon
  Distribution response;
  TimeNs blocking_total = 0;  // over completed and censored jobs
  std::uint32_t migrations = 0;
  std::size_t misses = 0;

  friend bool operator==(const TaskStats&, const TaskStats&) = default;
};

/// One sample of an overhead population.
struct Sample {
  TaskId task = 0;
  std::uint64_t job = 0;
  TimeNs time = 0;  // when the sample closed
  TimeNs value = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Populations, keyed by name:
//   lock, unlock, mig_to, mig_bk, ctx   one sample per OVERHEAD_BEGIN/END pair
//   lock_path    per CS_REQUEST: mig_to + lock overhead leading up to it
//   unlock_path  per CS_RELEASE: unlock overhead plus the mig_bk that
//                directly follows it, if any
inline constexpr std::string_view kPopulations[] = {"lock",     "unlock",    "mig_to",
                                                    "mig_bk",   "ctx",       "lock_path",
                                                    "unlock_path"};

struct ProtocolStats {
  Protocol protocol = Protocol::Mpcp;
  TimeNs horizon = 0;
  std::map<std::string, std::vector<Sample>, std::less<>> populations;
  Distribution response;  // completed jobs only
  std::vector<TaskStats> tasks;  // ordered by task id
  std::size_t completed = 0;
  std::size_t censored = 0;
  std::size_t misses = 0;
  std::vector<JobMetrics> jobs;

  friend bool operator==(const ProtocolStats&, const ProtocolStats&) = default;
};

ProtocolStats summarize(const Trace& trace, const Scenario& scenario);

// CSV schemas (header line first, LF line ends, no quoting needed):
//   events.csv   time,seq,kind,task,job,processor,resource,priority,detail
//   summary.csv  task,jobs,rt_min,rt_avg,rt_max,blocking_total,migrations,misses
//   samples.csv  population,task,job,time,value
// Absent optional fields are empty. rt_avg has three decimals; rt_* are
// empty for a task with no completed job.
std::string events_csv(const Trace& trace);
std::string summary_csv(const ProtocolStats& stats);
std::string samples_csv(const ProtocolStats& stats);

/// Inverse of events_csv. Throws std::invalid_argument naming the line.
std::vector<Event> parse_events_csv(std::string_view text);

/// Writes `contents`; failures throw std::runtime_error naming the path.
void export_csv(const std::filesystem::path& path, std::string_view contents);

}  // namespace rtsim
