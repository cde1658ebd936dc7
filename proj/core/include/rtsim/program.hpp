#pragma once

#include <vector>

#include "rtsim/event.hpp"
#include "rtsim/model.hpp"

namespace rtsim {

enum class OverheadKind { Lock, Unlock, MigTo, MigBack, Ctx };

EventDetail to_detail(OverheadKind kind);

enum class StepKind {
  Execute,          // non-critical work
  Overhead,         // non-preemptive kernel slice, not part of the WCET
  MigrateTo,        // instant: move to a synchronization processor
  MigrateBack,      // instant: return to the home processor
  Request,          // instant: lock directive
  CriticalSection,  // work while owning the resource
  Release,          // instant: unlock directive
  Complete,         // instant: job end
};

struct Step {
  StepKind kind = StepKind::Execute;
  TimeNs length = 0;
  std::size_t resource = 0;  // resource index for Request/CriticalSection/Release
  ProcessorId target = 0;    // for MigrateTo/MigrateBack
  OverheadKind overhead = OverheadKind::Lock;
};

constexpr bool is_timed(StepKind k) {
  return k == StepKind::Execute || k == StepKind::Overhead || k == StepKind::CriticalSection;
}

/// Expands one job of `task` into its step sequence under the scenario's
/// protocol and overheads. Zero-cost overheads produce no step.
///
/// Distributed protocols migrate to the resource's synchronization
/// processor before the lock directive and migrate back after the unlock
/// directive only when non-critical work comes next; consecutive sections
/// with no work between them stay remote.
std::vector<Step> build_program(const Scenario& scenario, const TaskSpec& task);

}  // namespace rtsim
