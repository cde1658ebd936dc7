#include "rtsim/engine.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <queue>

#include "rtsim/program.hpp"
#include "rtsim/sched.hpp"
#include "rtsim/sync.hpp"

namespace rtsim {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::NonCritical: return "NONCRIT";
    case Phase::Waiting: return "WAITING";
    case Phase::Spinning: return "SPINNING";
    case Phase::InCriticalSection: return "IN_CS";
    case Phase::Migrating: return "MIGRATING";
    case Phase::Done: return "DONE";
  }
  return "?";
}

namespace {

constexpr int kNoAction = -1;

struct LiveJob {
  JobState state;
  std::size_t cursor = 0;
  bool entered = false;
  TimeNs step_remaining = 0;
  bool in_ctx = false;
  TimeNs ctx_remaining = 0;
  ProcessorId location = 0;
};

int step_class(StepKind kind) {
  switch (kind) {
    case StepKind::Release: return 0;
    case StepKind::Complete: return 1;
    case StepKind::MigrateTo:
    case StepKind::MigrateBack: return 2;
    case StepKind::Execute:
    case StepKind::Overhead:
    case StepKind::CriticalSection: return 3;
    case StepKind::Request: return 4;
  }
  return kNoAction;
}

class Engine final : private SchedulerObserver {
 public:
  Engine(const Scenario& scenario, TimeNs horizon, std::uint64_t seed, const EngineOptions& options)
      : scenario_(scenario),
        options_(options),
        horizon_(horizon),
        sched_(scenario.system.processors, home_processors(scenario), this),
        sync_(scenario, base_priorities(scenario)),
        current_(scenario.tasks.size()),
        backlog_(scenario.tasks.size()),
        released_(scenario.tasks.size(), 0) {
    trace_.protocol = scenario.system.protocol;
    trace_.horizon = horizon;
    trace_.fingerprint = fingerprint(scenario, horizon, seed);
    trace_.processors.resize(scenario.system.processors);
    programs_.reserve(scenario.tasks.size());
    for (const auto& task : scenario.tasks) programs_.push_back(build_program(scenario, task));
  }

  Trace run() {
    try {
      for (TaskIndex t = 0; t < scenario_.tasks.size(); ++t) releases_.push({0, t});
      while (true) {
        instant();
        if (now_ >= horizon_) break;
        const TimeNs next = next_instant();
        credit(next - now_);
        now_ = next;
      }
      finish();
    } catch (const InternalFault& e) {
      throw SimulationError(std::string("internal fault at t=") + std::to_string(now_) + ": " +
                                e.what(),
                            std::move(trace_));
    } catch (const SyncError& e) {
      throw SimulationError(std::string("protocol fault at t=") + std::to_string(now_) + ": " +
                                e.what(),
                            std::move(trace_));
    }
    return std::move(trace_);
  }

 private:
  static std::vector<ProcessorId> home_processors(const Scenario& s) {
    std::vector<ProcessorId> homes;
    for (const auto& t : s.tasks) homes.push_back(t.home_processor);
    return homes;
  }

  static std::vector<Priority> base_priorities(const Scenario& s) {
    std::vector<Priority> out;
    for (const auto& t : s.tasks) out.push_back(t.priority);
    return out;
  }

  const TaskSpec& spec(TaskIndex t) const { return scenario_.tasks[t]; }
  LiveJob& job(TaskIndex t) {
    if (!current_[t]) throw InternalFault("task " + std::to_string(t) + " has no live job");
    return *current_[t];
  }
  const Step& step(TaskIndex t) { return programs_[t].at(job(t).cursor); }

  Priority current_priority(TaskIndex t) {
    return sched_.node(t, job(t).location).effective_priority;
  }

  void emit(EventKind kind, TaskIndex t, std::uint64_t number, ProcessorId p,
            std::optional<std::size_t> resource = std::nullopt,
            std::optional<Priority> priority = std::nullopt,
            EventDetail detail = EventDetail::None) {
    Event e;
    e.time = now_;
    e.sequence = trace_.events.size();
    e.kind = kind;
    e.task = spec(t).id;
    e.job = number;
    e.processor = p;
    if (resource) e.resource = scenario_.resources.at(*resource).id;
    e.priority = priority;
    e.detail = detail;
    trace_.events.push_back(e);
  }

  void emit_for(EventKind kind, TaskIndex t, std::optional<std::size_t> resource = std::nullopt,
                std::optional<Priority> priority = std::nullopt,
                EventDetail detail = EventDetail::None) {
    auto& j = job(t);
    emit(kind, t, j.state.number, j.location, resource, priority, detail);
  }

  // -- scheduler callbacks ---------------------------------------------------

  void on_dispatch(TaskIndex t, ProcessorId p, Priority prio) override {
    auto& j = job(t);
    emit(EventKind::Dispatch, t, j.state.number, p, std::nullopt, prio);
    if (const TimeNs ctx = scenario_.system.overheads.context_switch; ctx > 0) {
      inject_overhead(OverheadKind::Ctx, t, p);
    }
  }

  void on_preempt(TaskIndex t, ProcessorId p, Priority prio) override {
    emit(EventKind::Preempt, t, job(t).state.number, p, std::nullopt, prio);
  }

  void on_migrate(TaskIndex t, ProcessorId, ProcessorId to, Priority prio, bool noop) override {
    if (noop) {
      emit(EventKind::MigrateTo, t, job(t).state.number, to, std::nullopt, prio, EventDetail::Noop);
    }
  }

  // -- overheads -------------------------------------------------------------

  /// Starts a non-preemptive overhead slice for the job on `p`. Context
  /// switches are tracked outside the step program; the other kinds are
  /// program steps entered by the caller.
  void inject_overhead(OverheadKind kind, TaskIndex t, ProcessorId p) {
    auto& j = job(t);
    if (kind == OverheadKind::Ctx) {
      j.in_ctx = true;
      j.ctx_remaining = scenario_.system.overheads.context_switch;
    }
    emit(EventKind::OverheadBegin, t, j.state.number, p, std::nullopt, std::nullopt,
         to_detail(kind));
    sched_.set_pinned(t, true);
  }

  // -- instants --------------------------------------------------------------

  void instant() {
    release_jobs();
    while (true) {
      while (auto t = next_action()) perform(*t);
      sched_.reschedule_pending();
      if (!next_action()) break;
    }
    check_deadlines();
    if (options_.check_invariants) check_invariants();
  }

  void release_jobs() {
    while (!releases_.empty() && releases_.top().first == now_) {
      const TaskIndex t = releases_.top().second;
      releases_.pop();
      const auto& task = spec(t);
      LiveJob j;
      j.state.task_id = task.id;
      j.state.number = released_[t]++;
      j.state.release_time = now_;
      j.state.abs_deadline = now_ + task.deadline;
      j.state.remaining = task.wcet;
      j.location = task.home_processor;
      emit(EventKind::JobRelease, t, j.state.number, task.home_processor, std::nullopt,
           task.priority);
      if (current_[t]) {
        backlog_[t].push_back(std::move(j));
      } else {
        start_job(t, std::move(j));
      }
      if (now_ + task.period < horizon_) releases_.push({now_ + task.period, t});
    }
  }

  void start_job(TaskIndex t, LiveJob j) {
    current_[t] = std::move(j);
    sched_.enqueue_ready(t, spec(t).home_processor, spec(t).priority);
  }

  int action_class(TaskIndex t) {
    auto& j = job(t);
    if (j.in_ctx) return j.ctx_remaining == 0 ? 3 : kNoAction;
    if (j.state.phase == Phase::Spinning || j.state.phase == Phase::Waiting) return kNoAction;
    const auto& prog = programs_[t];
    const Step& s = prog.at(j.cursor);
    if (is_timed(s.kind) && j.entered) {
      if (j.step_remaining > 0) return kNoAction;
      return step_class(prog.at(j.cursor + 1).kind);
    }
    return step_class(s.kind);
  }

  std::optional<TaskIndex> next_action() {
    std::optional<TaskIndex> best;
    int best_class = kNoAction;
    for (ProcessorId p = 0; p < scenario_.system.processors; ++p) {
      auto t = sched_.scheduled_on(p);
      if (!t) continue;
      const int c = action_class(*t);
      if (c == kNoAction) continue;
      if (!best || c < best_class) {
        best = t;
        best_class = c;
      }
    }
    return best;
  }

  void perform(TaskIndex t) {
    auto& j = job(t);
    if (j.in_ctx) {
      j.in_ctx = false;
      emit_for(EventKind::OverheadEnd, t, std::nullopt, std::nullopt, EventDetail::Ctx);
      sched_.set_pinned(t, false);
      return;
    }
    if (is_timed(step(t).kind) && j.entered) {
      if (step(t).kind == StepKind::Overhead) {
        emit_for(EventKind::OverheadEnd, t, std::nullopt, std::nullopt,
                 to_detail(step(t).overhead));
        sched_.set_pinned(t, false);
      }
      ++j.cursor;
      j.entered = false;
    }
    const Step& s = step(t);
    switch (s.kind) {
      case StepKind::Execute:
        enter(t, s.length, Phase::NonCritical);
        break;
      case StepKind::Overhead:
        enter(t, s.length,
              s.overhead == OverheadKind::Unlock ? Phase::InCriticalSection
              : (s.overhead == OverheadKind::MigTo || s.overhead == OverheadKind::MigBack)
                  ? Phase::Migrating
                  : Phase::NonCritical);
        inject_overhead(s.overhead, t, j.location);
        break;
      case StepKind::CriticalSection:
        throw InternalFault("critical section entered without acquisition");
      case StepKind::Request:
        lock_directive(t, s.resource);
        break;
      case StepKind::Release:
        unlock_directive(t, s.resource);
        break;
      case StepKind::MigrateTo:
      case StepKind::MigrateBack:
        migrate(t, s);
        break;
      case StepKind::Complete:
        complete(t);
        break;
    }
  }

  void enter(TaskIndex t, TimeNs length, Phase phase) {
    auto& j = job(t);
    j.entered = true;
    j.step_remaining = length;
    j.state.phase = phase;
  }

  void enter_critical_section(TaskIndex t, std::size_t resource, Priority prio) {
    auto& j = job(t);
    if (step(t).kind != StepKind::CriticalSection) {
      throw InternalFault("grant for task " + std::to_string(t) + " outside a request");
    }
    TimeNs length = step(t).length;
    if (options_.mutation == Mutation::StretchCriticalSection) ++length;
    enter(t, length, Phase::InCriticalSection);
    emit(EventKind::CsAcquire, t, j.state.number, j.location, resource, prio);
  }

  void apply(const Effect& effect, std::size_t resource) {
    if (const auto* sp = std::get_if<SetPriority>(&effect)) {
      sched_.set_effective_priority(sp->task, job(sp->task).location, sp->priority);
    } else if (const auto* su = std::get_if<Suspend>(&effect)) {
      auto& j = job(su->task);
      j.state.phase = Phase::Waiting;
      emit_for(EventKind::Suspend, su->task, resource, current_priority(su->task));
      sched_.block(su->task);
    } else if (const auto* sp2 = std::get_if<StartSpin>(&effect)) {
      job(sp2->task).state.phase = Phase::Spinning;
      sched_.set_effective_priority(sp2->task, job(sp2->task).location, sp2->priority);
    } else if (const auto* g = std::get_if<Grant>(&effect)) {
      auto& j = job(g->task);
      const bool suspended = j.state.phase == Phase::Waiting;
      sched_.set_effective_priority(g->task, j.location, g->priority);
      enter_critical_section(g->task, resource, g->priority);
      if (suspended) {
        emit_for(EventKind::Resume, g->task, resource, g->priority);
        sched_.enqueue_ready(g->task, j.location, g->priority);
      }
    }
  }

  void lock_directive(TaskIndex t, std::size_t resource) {
    auto& j = job(t);
    const Priority before = current_priority(t);
    emit_for(EventKind::CsRequest, t, resource, before);
    auto result = sync_.obtain(t, resource, now_, before);
    ++j.cursor;
    j.entered = false;
    if (result.status == ObtainStatus::Acquired) {
      for (const auto& e : result.effects) apply(e, resource);
      enter_critical_section(t, resource, current_priority(t));
      return;
    }
    for (const auto& e : result.effects) apply(e, resource);
  }

  void unlock_directive(TaskIndex t, std::size_t resource) {
    auto& j = job(t);
    emit_for(EventKind::CsRelease, t, resource, current_priority(t));
    auto result = sync_.release(t, resource, now_);
    if (result.status == ReleaseStatus::NotOwner) {
      throw InternalFault("task " + std::to_string(t) + " released a semaphore it does not own");
    }
    ++j.cursor;
    j.entered = false;
    j.state.phase = Phase::NonCritical;
    for (const auto& e : result.effects) apply(e, resource);
  }

  void migrate(TaskIndex t, const Step& s) {
    auto& j = job(t);
    const Priority base = spec(t).priority;
    const bool back = s.kind == StepKind::MigrateBack;
    emit(back ? EventKind::MigrateBack : EventKind::MigrateTo, t, j.state.number, s.target,
         s.resource, base);
    sched_.migrate_to(t, s.target, base);
    j.location = s.target;
    ++j.state.migrations;
    ++j.cursor;
    j.entered = false;
    j.state.phase = Phase::Migrating;
  }

  void complete(TaskIndex t) {
    auto& j = job(t);
    emit_for(EventKind::JobComplete, t, std::nullopt, current_priority(t));
    sched_.block(t);
    j.state.phase = Phase::Done;
    record(t, j, now_);
    current_[t].reset();
    if (!backlog_[t].empty()) {
      LiveJob next = std::move(backlog_[t].front());
      backlog_[t].pop_front();
      start_job(t, std::move(next));
    }
  }

  void record(TaskIndex t, const LiveJob& j, std::optional<TimeNs> completion) {
    JobSummary s;
    s.task = spec(t).id;
    s.job = j.state.number;
    s.release = j.state.release_time;
    s.abs_deadline = j.state.abs_deadline;
    s.completion = completion;
    s.executed = j.state.executed;
    s.blocking = j.state.blocking_accrued;
    s.overhead = j.state.overhead_accrued;
    s.migrations = j.state.migrations;
    s.missed = j.state.missed || (completion && *completion > j.state.abs_deadline);
    trace_.jobs.push_back(s);
  }

  void check_deadlines() {
    auto check = [&](TaskIndex t, LiveJob& j) {
      if (j.state.abs_deadline != now_ || j.state.missed) return;
      j.state.missed = true;
      emit(EventKind::DeadlineCheck, t, j.state.number, j.location, std::nullopt, std::nullopt,
           EventDetail::Miss);
    };
    for (TaskIndex t = 0; t < scenario_.tasks.size(); ++t) {
      if (current_[t]) check(t, *current_[t]);
      for (auto& j : backlog_[t]) check(t, j);
    }
  }

  TimeNs next_instant() {
    TimeNs next = horizon_;
    if (!releases_.empty()) next = std::min(next, releases_.top().first);
    for (ProcessorId p = 0; p < scenario_.system.processors; ++p) {
      auto t = sched_.scheduled_on(p);
      if (!t) continue;
      const auto& j = job(*t);
      TimeNs left = 0;
      if (j.in_ctx) {
        left = j.ctx_remaining;
      } else if (j.state.phase == Phase::Spinning) {
        continue;
      } else if (j.entered) {
        left = j.step_remaining;
      }
      if (left <= 0) throw InternalFault("scheduled job without progress at settle");
      next = std::min(next, now_ + left);
    }
    return next;
  }

  void credit(TimeNs delta) {
    for (ProcessorId p = 0; p < scenario_.system.processors; ++p) {
      auto& account = trace_.processors[p];
      auto t = sched_.scheduled_on(p);
      if (!t) {
        account.idle += delta;
        continue;
      }
      auto& j = job(*t);
      if (j.in_ctx) {
        j.ctx_remaining -= delta;
        j.state.overhead_accrued += delta;
        account.overhead += delta;
      } else if (j.state.phase == Phase::Spinning) {
        j.state.blocking_accrued += delta;
        account.spin += delta;
      } else if (step(*t).kind == StepKind::Overhead) {
        j.step_remaining -= delta;
        j.state.overhead_accrued += delta;
        account.overhead += delta;
      } else {
        j.step_remaining -= delta;
        j.state.executed += delta;
        j.state.remaining -= delta;
        account.execution += delta;
      }
    }
    for (auto& j : current_) {
      if (j && j->state.phase == Phase::Waiting) j->state.blocking_accrued += delta;
    }
  }

  void check_invariants() {
    sched_.check_invariants();
    for (TaskIndex t = 0; t < scenario_.tasks.size(); ++t) {
      if (!current_[t]) {
        if (sched_.active_processor(t)) throw InternalFault("idle task has an active node");
        continue;
      }
      const auto& j = *current_[t];
      const auto active = sched_.active_processor(t);
      if (j.state.phase == Phase::Waiting) {
        if (active) throw InternalFault("suspended job has an active scheduler node");
      } else if (!active || *active != j.location) {
        throw InternalFault("job location disagrees with its scheduler node");
      }
      if (options_.mutation == Mutation::None &&
          j.state.executed + j.state.remaining != spec(t).wcet) {
        throw InternalFault("executed + remaining != wcet for task " + std::to_string(t));
      }
    }
  }

  void finish() {
    for (TaskIndex t = 0; t < scenario_.tasks.size(); ++t) {
      if (current_[t]) record(t, *current_[t], std::nullopt);
      for (const auto& j : backlog_[t]) record(t, j, std::nullopt);
    }
    std::stable_sort(trace_.jobs.begin(), trace_.jobs.end(), [](const auto& a, const auto& b) {
      return std::pair(a.release, a.task) < std::pair(b.release, b.task);
    });
  }

  const Scenario& scenario_;
  EngineOptions options_;
  TimeNs horizon_;
  TimeNs now_ = 0;
  Trace trace_;
  Scheduler sched_;
  SyncManager sync_;
  std::vector<std::vector<Step>> programs_;
  std::vector<std::optional<LiveJob>> current_;
  std::vector<std::deque<LiveJob>> backlog_;
  std::vector<std::uint64_t> released_;
  std::priority_queue<std::pair<TimeNs, TaskIndex>, std::vector<std::pair<TimeNs, TaskIndex>>,
                      std::greater<>>
      releases_;
};

}  // namespace

Trace run(const Scenario& scenario, TimeNs horizon, std::uint64_t seed,
          const EngineOptions& options) {
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (auto report = validate_config(scenario); !report.ok()) {
    throw std::invalid_argument("invalid scenario:\n" + report.to_text());
  }
  Engine engine(scenario, horizon, seed, options);
  return engine.run();
}

}  // namespace rtsim
