#include "rtsim/sched.hpp"

#include <string>

namespace rtsim {

std::string_view to_string(NodeState state) {
  switch (state) {
    case NodeState::Blocked: return "BLOCKED";
    case NodeState::Ready: return "READY";
    case NodeState::Scheduled: return "SCHEDULED";
  }
  return "?";
}

void ReadyQueue::insert(const Entry& entry) {
  if (!entries_.insert(entry).second) {
    throw InternalFault("ready queue already holds task " + std::to_string(entry.task));
  }
}

void ReadyQueue::erase(const Entry& entry) {
  if (entries_.erase(entry) != 1) {
    throw InternalFault("ready queue does not hold task " + std::to_string(entry.task));
  }
}

std::optional<ReadyQueue::Entry> ReadyQueue::head() const {
  if (entries_.empty()) return std::nullopt;
  return *entries_.begin();
}

Scheduler::Scheduler(std::uint32_t processors, std::vector<ProcessorId> home_processors,
                     SchedulerObserver* observer)
    : processors_(processors),
      homes_(std::move(home_processors)),
      observer_(observer),
      nodes_(homes_.size() * processors),
      ready_(processors),
      scheduled_(processors),
      pending_(processors, false),
      pinned_(homes_.size(), false) {
  for (TaskIndex t = 0; t < homes_.size(); ++t) {
    if (homes_[t] >= processors) throw InternalFault("home processor out of range");
    for (ProcessorId p = 0; p < processors; ++p) {
      auto& n = node_ref(t, p);
      n.task = t;
      n.processor = p;
    }
  }
}

SchedulerNode& Scheduler::node_ref(TaskIndex task, ProcessorId processor) {
  return nodes_.at(static_cast<std::size_t>(task) * processors_ + processor);
}

const SchedulerNode& Scheduler::node(TaskIndex task, ProcessorId processor) const {
  return nodes_.at(static_cast<std::size_t>(task) * processors_ + processor);
}

std::optional<ProcessorId> Scheduler::active_processor(TaskIndex task) const {
  for (ProcessorId p = 0; p < processors_; ++p) {
    if (node(task, p).state != NodeState::Blocked) return p;
  }
  return std::nullopt;
}

std::optional<TaskIndex> Scheduler::scheduled_on(ProcessorId processor) const {
  return scheduled_.at(processor);
}

void Scheduler::park_inactive(TaskIndex task, ProcessorId keep) {
  for (ProcessorId p = 0; p < processors_; ++p) {
    if (p == keep || p == homes_.at(task)) continue;
    auto& n = node_ref(task, p);
    if (n.state == NodeState::Blocked) n.effective_priority = Priority::parked();
  }
}

void Scheduler::make_ready(SchedulerNode& n, std::int64_t stamp) {
  n.state = NodeState::Ready;
  n.stamp = stamp;
  ready_.at(n.processor).insert({n.effective_priority, n.stamp, n.task});
  mark(n.processor);
}

void Scheduler::enqueue_ready(TaskIndex task, ProcessorId processor, Priority priority) {
  auto& n = node_ref(task, processor);
  if (n.state != NodeState::Blocked) {
    throw InternalFault("enqueue_ready: task " + std::to_string(task) + " on processor " +
                        std::to_string(processor) + " is already " +
                        std::string(to_string(n.state)));
  }
  if (auto active = active_processor(task)) {
    throw InternalFault("enqueue_ready: task " + std::to_string(task) +
                        " already active on processor " + std::to_string(*active));
  }
  if (priority == Priority::parked()) throw InternalFault("enqueue_ready at parked priority");
  park_inactive(task, processor);
  n.effective_priority = priority;
  make_ready(n, ++tail_stamp_);
}

void Scheduler::block(TaskIndex task) {
  auto active = active_processor(task);
  if (!active) throw InternalFault("block: task " + std::to_string(task) + " has no active node");
  auto& n = node_ref(task, *active);
  if (n.state == NodeState::Scheduled) {
    scheduled_.at(*active).reset();
  } else {
    ready_.at(*active).erase({n.effective_priority, n.stamp, task});
  }
  n.state = NodeState::Blocked;
  pinned_.at(task) = false;
  mark(*active);
}

void Scheduler::set_effective_priority(TaskIndex task, ProcessorId processor, Priority priority) {
  auto& n = node_ref(task, processor);
  if (n.effective_priority == priority) return;
  switch (n.state) {
    case NodeState::Blocked:
      n.effective_priority = priority;
      return;
    case NodeState::Ready:
      ready_.at(processor).erase({n.effective_priority, n.stamp, task});
      n.effective_priority = priority;
      ready_.at(processor).insert({n.effective_priority, n.stamp, task});
      break;
    case NodeState::Scheduled:
      n.effective_priority = priority;
      break;
  }
  mark(processor);
}

void Scheduler::migrate_to(TaskIndex task, ProcessorId target, Priority priority_on_target) {
  auto source = active_processor(task);
  if (!source) throw InternalFault("migrate_to: task " + std::to_string(task) + " is not active");
  if (*source == target) {
    if (observer_) observer_->on_migrate(task, *source, target, priority_on_target, true);
    return;
  }
  block(task);
  if (*source != homes_.at(task)) node_ref(task, *source).effective_priority = Priority::parked();
  auto& dst = node_ref(task, target);
  dst.effective_priority = priority_on_target;
  make_ready(dst, ++tail_stamp_);
  if (observer_) observer_->on_migrate(task, *source, target, priority_on_target, false);
}

void Scheduler::set_pinned(TaskIndex task, bool pinned) {
  if (pinned_.at(task) == pinned) return;
  pinned_.at(task) = pinned;
  if (!pinned) {
    if (auto p = active_processor(task)) mark(*p);
  }
}

std::optional<TaskIndex> Scheduler::reschedule(ProcessorId processor) {
  pending_.at(processor) = false;
  auto& queue = ready_.at(processor);
  auto head = queue.head();
  auto& current = scheduled_.at(processor);
  if (!head) return std::nullopt;
  if (current) {
    if (pinned_.at(*current)) return std::nullopt;
    auto& cur = node_ref(*current, processor);
    if (!head->priority.more_urgent_than(cur.effective_priority)) return std::nullopt;
    const TaskIndex preempted = *current;
    current.reset();
    make_ready(cur, --head_stamp_);
    if (observer_) observer_->on_preempt(preempted, processor, cur.effective_priority);
  }
  queue.erase(*head);
  auto& next = node_ref(head->task, processor);
  next.state = NodeState::Scheduled;
  current = head->task;
  pending_.at(processor) = false;
  if (observer_) observer_->on_dispatch(head->task, processor, next.effective_priority);
  return head->task;
}

std::vector<TaskIndex> Scheduler::reschedule_pending() {
  std::vector<TaskIndex> dispatched;
  for (ProcessorId p = 0; p < processors_; ++p) {
    if (!pending_[p]) continue;
    if (auto t = reschedule(p)) dispatched.push_back(*t);
  }
  return dispatched;
}

bool Scheduler::has_pending() const {
  for (bool b : pending_) {
    if (b) return true;
  }
  return false;
}

void Scheduler::check_invariants() const {
  for (TaskIndex t = 0; t < homes_.size(); ++t) {
    int active = 0;
    for (ProcessorId p = 0; p < processors_; ++p) {
      if (node(t, p).state != NodeState::Blocked) ++active;
    }
    if (active > 1) {
      throw InternalFault("task " + std::to_string(t) + " has " + std::to_string(active) +
                          " non-blocked scheduler nodes");
    }
  }
  for (ProcessorId p = 0; p < processors_; ++p) {
    const auto head = ready_[p].head();
    const auto& cur = scheduled_[p];
    if (!cur) {
      if (head) throw InternalFault("processor " + std::to_string(p) + " idle with ready work");
      continue;
    }
    const auto& n = node(*cur, p);
    if (n.state != NodeState::Scheduled) throw InternalFault("scheduled slot holds a non-scheduled node");
    if (head && head->priority.more_urgent_than(n.effective_priority) && !pinned_[*cur]) {
      throw InternalFault("processor " + std::to_string(p) + " runs a less urgent node");
    }
  }
}

}  // namespace rtsim
