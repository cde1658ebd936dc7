#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rtsim/model.hpp"
#include "rtsim/sched.hpp"

namespace rtsim {

/// Protocol misuse by the caller, e.g. a nested request.
class SyncError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class WaitingSemantics { Suspend, Spin };
enum class QueueDiscipline { Priority, Fifo };
enum class PlacementKind { Local, Remote };

struct Placement {
  PlacementKind kind = PlacementKind::Local;
  std::optional<ProcessorId> processor;

  static Placement local() { return {}; }
  static Placement remote(ProcessorId p) { return {PlacementKind::Remote, p}; }
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct Waiter {
  TaskIndex task = 0;
  Priority base;
  /// Effective priority at request time, restored after the critical section.
  Priority saved;
  TimeNs requested_at = 0;
  std::uint64_t arrival = 0;
};

struct Semaphore {
  std::size_t resource = 0;  // index into the scenario's resource list
  ResourceId id = 0;
  QueueDiscipline discipline = QueueDiscipline::Priority;
  std::optional<Priority> ceiling;  // static ceiling, MPCP and DPCP only
  std::optional<TaskIndex> owner;
  Priority owner_saved = Priority::parked();
  std::vector<Waiter> wait_queue;
  std::uint64_t arrivals = 0;
};

// Effects handed back to the engine, applied in order within one event.
struct SetPriority {
  TaskIndex task;
  Priority priority;
};
struct Suspend {
  TaskIndex task;
};
struct StartSpin {
  TaskIndex task;
  Priority priority;
};
/// `task` became the owner while waiting; it runs its section at `priority`.
struct Grant {
  TaskIndex task;
  Priority priority;
};
using Effect = std::variant<SetPriority, Suspend, StartSpin, Grant>;

/// Protocol-specific blocks of the lock/unlock skeleton: the acquire path
/// (priority of a new owner), the wait path and the release path.
class ProtocolHooks {
 public:
  virtual ~ProtocolHooks() = default;

  virtual Protocol protocol() const = 0;
  virtual WaitingSemantics waiting_semantics() const = 0;
  virtual QueueDiscipline discipline() const = 0;
  PlacementKind placement() const {
    return is_distributed(protocol()) ? PlacementKind::Remote : PlacementKind::Local;
  }

  /// Acquire path: priority the new owner runs its section at. `saved` is
  /// the owner's effective priority before acquisition.
  virtual Priority on_acquire(const Semaphore& sem, Priority saved) const = 0;

  /// Wait path, run after `waiter` joined the queue.
  virtual std::vector<Effect> on_wait(const Semaphore& sem, const Waiter& waiter) const = 0;

  /// Release path for the departing owner (before the next owner is chosen).
  virtual std::vector<Effect> on_release(const Semaphore& sem) const {
    return {SetPriority{*sem.owner, sem.owner_saved}};
  }
};

std::unique_ptr<ProtocolHooks> make_hooks(Protocol protocol);

/// Most urgent base priority among current waiters; empty queue gives none.
std::optional<Priority> dynamic_ceiling(const Semaphore& sem);

/// Where a protocol executes critical sections on `resource`.
Placement protocol_placement(Protocol protocol, const ResourceSpec& resource);

/// Uniprocessor immediate-ceiling rule used on each synchronization
/// processor: the owner jumps to the resource ceiling on acquisition.
std::vector<Effect> icpp_on_sync_processor(const Semaphore& sem, TaskIndex task);

enum class ObtainStatus { Acquired, Waiting };
enum class ReleaseStatus { Released, NotOwner };

struct ObtainResult {
  ObtainStatus status;
  std::vector<Effect> effects;
};

struct ReleaseResult {
  ReleaseStatus status;
  std::optional<TaskIndex> next_owner;
  std::vector<Effect> effects;
};

/// All semaphores of one simulation plus the lock/unlock directives.
class SyncManager {
 public:
  SyncManager(const Scenario& scenario, std::vector<Priority> base_priorities);

  const ProtocolHooks& hooks() const { return *hooks_; }
  const Semaphore& semaphore(std::size_t resource) const { return semaphores_.at(resource); }
  std::size_t size() const { return semaphores_.size(); }

  /// Lock directive. Throws SyncError on a nested request.
  ObtainResult obtain(TaskIndex task, std::size_t resource, TimeNs now, Priority current);

  /// Unlock directive. A non-owner gets NotOwner and nothing changes.
  ReleaseResult release(TaskIndex task, std::size_t resource, TimeNs now);

  std::optional<std::size_t> held_by(TaskIndex task) const { return held_.at(task); }
  std::optional<std::size_t> waiting_on(TaskIndex task) const { return waiting_.at(task); }

 private:
  void enqueue(Semaphore& sem, const Waiter& waiter);

  std::unique_ptr<ProtocolHooks> hooks_;
  std::vector<Semaphore> semaphores_;
  std::vector<Priority> base_;
  std::vector<std::optional<std::size_t>> held_;
  std::vector<std::optional<std::size_t>> waiting_;
};

}  // namespace rtsim
