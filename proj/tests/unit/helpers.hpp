#pragma once

#include <algorithm>
#include <filesystem>
#include <vector>

#include "rtsim/config_io.hpp"
#include "rtsim/engine.hpp"
#include "rtsim/model.hpp"

namespace rtsim::test {

inline std::filesystem::path source_dir() { return RTSIM_SOURCE_DIR; }

inline Scenario load_example(const std::string& name) {
  return load_scenario(source_dir() / "configs" / name);
}

inline TaskSpec make_task(TaskId id, TimeNs wcet, TimeNs period, std::uint32_t priority,
                          ProcessorId home = 0, std::vector<CriticalSectionSpec> cs = {}) {
  TaskSpec t;
  t.id = id;
  t.wcet = wcet;
  t.period = period;
  t.deadline = period;
  t.priority = Priority{priority};
  t.home_processor = home;
  t.critical_sections = std::move(cs);
  return t;
}

inline Scenario single_processor(std::vector<TaskSpec> tasks, Protocol protocol = Protocol::Mpcp) {
  Scenario s;
  s.system.processors = 1;
  s.system.roles = {ProcessorRole::Application};
  s.system.protocol = protocol;
  s.tasks = std::move(tasks);
  return s;
}

inline std::vector<Event> events_of(const Trace& t, EventKind kind) {
  std::vector<Event> out;
  std::copy_if(t.events.begin(), t.events.end(), std::back_inserter(out),
               [&](const Event& e) { return e.kind == kind; });
  return out;
}

inline std::vector<Event> events_of(const Trace& t, EventKind kind, TaskId task) {
  std::vector<Event> out;
  std::copy_if(t.events.begin(), t.events.end(), std::back_inserter(out),
               [&](const Event& e) { return e.kind == kind && e.task == task; });
  return out;
}

inline const JobSummary& job_of(const Trace& t, TaskId task, std::uint64_t number) {
  auto it = std::find_if(t.jobs.begin(), t.jobs.end(), [&](const JobSummary& j) {
    return j.task == task && j.job == number;
  });
  if (it == t.jobs.end()) throw std::out_of_range("no such job");
  return *it;
}

inline TimeNs response_of(const Trace& t, TaskId task, std::uint64_t number) {
  const auto& j = job_of(t, task, number);
  return *j.completion - j.release;
}

}  // namespace rtsim::test
