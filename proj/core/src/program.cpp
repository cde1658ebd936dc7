#include "rtsim/program.hpp"

#include <stdexcept>

#include "rtsim/sync.hpp"

namespace rtsim {

EventDetail to_detail(OverheadKind kind) {
  switch (kind) {
    case OverheadKind::Lock: return EventDetail::Lock;
    case OverheadKind::Unlock: return EventDetail::Unlock;
    case OverheadKind::MigTo: return EventDetail::MigTo;
    case OverheadKind::MigBack: return EventDetail::MigBack;
    case OverheadKind::Ctx: return EventDetail::Ctx;
  }
  return EventDetail::None;
}

std::vector<Step> build_program(const Scenario& scenario, const TaskSpec& task) {
  const auto& o = scenario.system.overheads;
  std::vector<Step> steps;
  auto overhead = [&](OverheadKind kind, TimeNs cost) {
    if (cost > 0) steps.push_back({StepKind::Overhead, cost, 0, 0, kind});
  };

  ProcessorId location = task.home_processor;
  TimeNs cursor = 0;
  const auto& sections = task.critical_sections;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& cs = sections[k];
    const auto index = scenario.resource_index(cs.resource);
    if (!index) throw std::invalid_argument("unknown resource " + std::to_string(cs.resource));

    if (cs.offset > cursor) steps.push_back({StepKind::Execute, cs.offset - cursor});

    const auto placement = protocol_placement(scenario.system.protocol, scenario.resources[*index]);
    if (placement.kind == PlacementKind::Remote && location != *placement.processor) {
      overhead(OverheadKind::MigTo, o.migrate_to);
      steps.push_back({StepKind::MigrateTo, 0, *index, *placement.processor});
      location = *placement.processor;
    }
    overhead(OverheadKind::Lock, o.lock);
    steps.push_back({StepKind::Request, 0, *index});
    steps.push_back({StepKind::CriticalSection, cs.length, *index});
    overhead(OverheadKind::Unlock, o.unlock);
    steps.push_back({StepKind::Release, 0, *index});
    cursor = cs.end();

    const TimeNs next_start = k + 1 < sections.size() ? sections[k + 1].offset : task.wcet;
    if (location != task.home_processor && next_start > cursor) {
      overhead(OverheadKind::MigBack, o.migrate_back);
      steps.push_back({StepKind::MigrateBack, 0, *index, task.home_processor});
      location = task.home_processor;
    }
  }
  if (task.wcet > cursor) steps.push_back({StepKind::Execute, task.wcet - cursor});
  steps.push_back({StepKind::Complete});
  return steps;
}

}  // namespace rtsim
