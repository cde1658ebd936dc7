#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "rtsim/model.hpp"

namespace rtsim {

/// Dense index of a task inside one simulation (position in the task list).
using TaskIndex = std::uint32_t;

/// Engine or scheduler bookkeeping is inconsistent. Never caused by user
/// input; aborts the simulation.
class InternalFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class NodeState { Blocked, Ready, Scheduled };

std::string_view to_string(NodeState state);

/// A task's scheduling handle on one processor. Every task owns one node
/// per processor; at most one of them is non-blocked at any time.
struct SchedulerNode {
  TaskIndex task = 0;
  ProcessorId processor = 0;
  Priority effective_priority = Priority::parked();
  NodeState state = NodeState::Blocked;
  /// Position inside the priority class; smaller runs first.
  std::int64_t stamp = 0;
};

/// Per-processor ready set ordered by (priority, stamp).
class ReadyQueue {
 public:
  struct Entry {
    Priority priority;
    std::int64_t stamp;
    TaskIndex task;
    friend auto operator<=>(const Entry&, const Entry&) = default;
  };

  void insert(const Entry& entry);
  void erase(const Entry& entry);
  std::optional<Entry> head() const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::set<Entry> entries_;
};

class SchedulerObserver {
 public:
  virtual ~SchedulerObserver() = default;
  virtual void on_dispatch(TaskIndex, ProcessorId, Priority) {}
  virtual void on_preempt(TaskIndex, ProcessorId, Priority) {}
  virtual void on_migrate(TaskIndex, ProcessorId /*from*/, ProcessorId /*to*/, Priority,
                          bool /*noop*/) {}
};

/// Partitioned fixed-priority scheduler with one instance per processor.
///
/// State changes only mark processors for rescheduling; the owner decides
/// when `reschedule()` runs. That keeps every compound operation (notably
/// migration) atomic with respect to dispatching.
///
/// Ties: an incumbent SCHEDULED node is never displaced by an equal
/// priority; newly ready nodes join the tail of their priority class and
/// preempted nodes rejoin at its head.
class Scheduler {
 public:
  Scheduler(std::uint32_t processors, std::vector<ProcessorId> home_processors,
            SchedulerObserver* observer = nullptr);

  std::uint32_t processors() const { return processors_; }
  std::size_t tasks() const { return homes_.size(); }

  /// BLOCKED -> READY at `priority`, tail of its class.
  void enqueue_ready(TaskIndex task, ProcessorId processor, Priority priority);

  /// Active node -> BLOCKED. A node away from the home processor keeps its
  /// priority until the task activates elsewhere.
  void block(TaskIndex task);

  void set_effective_priority(TaskIndex task, ProcessorId processor, Priority priority);

  /// Blocks the active node and readies the node on `target` at
  /// `priority_on_target`, as one step. Migrating to the current processor
  /// is reported to the observer as a no-op and changes nothing.
  void migrate_to(TaskIndex task, ProcessorId target, Priority priority_on_target);

  /// A pinned SCHEDULED node cannot be preempted (non-preemptive section).
  void set_pinned(TaskIndex task, bool pinned);
  bool pinned(TaskIndex task) const { return pinned_.at(task); }

  /// Re-evaluates one processor. Returns the newly dispatched task, if any.
  std::optional<TaskIndex> reschedule(ProcessorId processor);

  /// Re-evaluates every processor marked since its last reschedule, in
  /// index order. Returns the tasks dispatched.
  std::vector<TaskIndex> reschedule_pending();
  bool has_pending() const;

  const SchedulerNode& node(TaskIndex task, ProcessorId processor) const;
  std::optional<ProcessorId> active_processor(TaskIndex task) const;
  std::optional<TaskIndex> scheduled_on(ProcessorId processor) const;
  std::size_t ready_count(ProcessorId processor) const { return ready_.at(processor).size(); }

  /// Throws InternalFault when a structural invariant fails. Meaningful
  /// only after rescheduling has settled.
  void check_invariants() const;

 private:
  SchedulerNode& node_ref(TaskIndex task, ProcessorId processor);
  void park_inactive(TaskIndex task, ProcessorId keep);
  void make_ready(SchedulerNode& node, std::int64_t stamp);
  void mark(ProcessorId processor) { pending_.at(processor) = true; }

  std::uint32_t processors_;
  std::vector<ProcessorId> homes_;
  SchedulerObserver* observer_;
  std::vector<SchedulerNode> nodes_;  // task-major: nodes_[task * processors_ + p]
  std::vector<ReadyQueue> ready_;
  std::vector<std::optional<TaskIndex>> scheduled_;
  std::vector<bool> pending_;
  std::vector<bool> pinned_;
  std::int64_t tail_stamp_ = 0;
  std::int64_t head_stamp_ = 0;
};

}  // namespace rtsim
