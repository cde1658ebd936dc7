#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "rtsim/event.hpp"
#include "rtsim/model.hpp"

namespace rtsim {

// Ordering contract
// -----------------
// Time advances from one decision instant to the next. At each instant t:
//
//   1. Job releases at t, in task order (JOB_RELEASE). A job released while
//      an earlier job of its task is unfinished waits behind it.
//   2. Actions of currently SCHEDULED jobs, one at a time, lowest class
//      first and then lowest processor index:
//        0  unlock directive (CS_RELEASE, hand-off to the next owner)
//        1  job completion
//        2  migration (MIGRATE_TO / MIGRATE_BACK)
//        3  entering the next timed step (OVERHEAD_BEGIN/END)
//        4  lock directive (CS_REQUEST, then CS_ACQUIRE or wait)
//   3. Rescheduling of every affected processor in index order (PREEMPT,
//      DISPATCH). Steps 2 and 3 repeat until no dispatched job has an action.
//   4. Deadline misses at t (DEADLINE_CHECK with detail "miss").
//
// Overhead slices are non-preemptive and never count against the WCET.
// Jobs are simulated over [0, horizon]; releases happen strictly before
// the horizon and unfinished jobs are reported as censored.

enum class Phase { NonCritical, Waiting, Spinning, InCriticalSection, Migrating, Done };

std::string_view to_string(Phase phase);

/// Live state of one job inside the engine.
struct JobState {
  TaskId task_id = 0;
  std::uint64_t number = 0;
  TimeNs release_time = 0;
  TimeNs abs_deadline = 0;
  TimeNs executed = 0;
  TimeNs remaining = 0;  // executed + remaining == wcet at all times
  Phase phase = Phase::NonCritical;
  std::uint32_t migrations = 0;
  TimeNs blocking_accrued = 0;
  TimeNs overhead_accrued = 0;
  bool missed = false;
};

/// Deliberate engine faults, used to show that oracle comparison catches
/// a broken build. Never enabled outside tests and `verify --mutate`.
enum class Mutation { None, StretchCriticalSection };

struct EngineOptions {
  bool check_invariants = true;
  Mutation mutation = Mutation::None;
};

/// Internal invariant breach. Carries the trace emitted up to the failure.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, Trace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trace& partial_trace() const { return partial_; }

 private:
  Trace partial_;
};

/// Runs the discrete-event simulation. The scenario must validate; a
/// scenario that does not is rejected with std::invalid_argument. The seed
/// only enters the trace fingerprint: the engine itself has no random
/// choices.
Trace run(const Scenario& scenario, TimeNs horizon, std::uint64_t seed = 0,
          const EngineOptions& options = {});

}  // namespace rtsim
