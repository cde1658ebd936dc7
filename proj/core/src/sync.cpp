#include "rtsim/sync.hpp"

#include <algorithm>
#include <string>

namespace rtsim {

std::optional<Priority> dynamic_ceiling(const Semaphore& sem) {
  std::optional<Priority> best;
  for (const auto& w : sem.wait_queue) best = best ? most_urgent(*best, w.base) : w.base;
  return best;
}

Placement protocol_placement(Protocol protocol, const ResourceSpec& resource) {
  if (!is_distributed(protocol)) return Placement::local();
  if (!resource.sync_processor) {
    throw SyncError("resource " + std::to_string(resource.id) + " has no synchronization processor");
  }
  return Placement::remote(*resource.sync_processor);
}

std::vector<Effect> icpp_on_sync_processor(const Semaphore& sem, TaskIndex task) {
  if (!sem.ceiling) {
    throw SyncError("resource " + std::to_string(sem.id) + " has no ceiling");
  }
  return {SetPriority{task, *sem.ceiling}};
}

namespace {

// MPCP: local sections at the static ceiling, priority-ordered suspension.
class MpcpHooks final : public ProtocolHooks {
 public:
  Protocol protocol() const override { return Protocol::Mpcp; }
  WaitingSemantics waiting_semantics() const override { return WaitingSemantics::Suspend; }
  QueueDiscipline discipline() const override { return QueueDiscipline::Priority; }
  Priority on_acquire(const Semaphore& sem, Priority) const override {
    if (!sem.ceiling) throw SyncError("resource " + std::to_string(sem.id) + " has no ceiling");
    return *sem.ceiling;
  }
  std::vector<Effect> on_wait(const Semaphore&, const Waiter& w) const override {
    return {Suspend{w.task}};
  }
};

// DPCP: same queueing as MPCP, but sections run on the synchronization
// processor where ICPP decides the owner's priority.
class DpcpHooks final : public ProtocolHooks {
 public:
  Protocol protocol() const override { return Protocol::Dpcp; }
  WaitingSemantics waiting_semantics() const override { return WaitingSemantics::Suspend; }
  QueueDiscipline discipline() const override { return QueueDiscipline::Priority; }
  Priority on_acquire(const Semaphore& sem, Priority) const override {
    return std::get<SetPriority>(icpp_on_sync_processor(sem, 0).front()).priority;
  }
  std::vector<Effect> on_wait(const Semaphore&, const Waiter& w) const override {
    return {Suspend{w.task}};
  }
};

// FMLP long requests (and DFLP): FIFO suspension, owner inherits the most
// urgent waiting priority.
class FmlpLongHooks final : public ProtocolHooks {
 public:
  explicit FmlpLongHooks(Protocol p) : protocol_(p) {}
  Protocol protocol() const override { return protocol_; }
  WaitingSemantics waiting_semantics() const override { return WaitingSemantics::Suspend; }
  QueueDiscipline discipline() const override { return QueueDiscipline::Fifo; }
  Priority on_acquire(const Semaphore& sem, Priority saved) const override {
    auto ceiling = dynamic_ceiling(sem);
    return ceiling ? most_urgent(saved, *ceiling) : saved;
  }
  std::vector<Effect> on_wait(const Semaphore& sem, const Waiter& w) const override {
    return {Suspend{w.task}, SetPriority{*sem.owner, on_acquire(sem, sem.owner_saved)}};
  }

 private:
  Protocol protocol_;
};

// FMLP short requests: FIFO spinning; owner and spinners are non-preemptive.
class FmlpShortHooks final : public ProtocolHooks {
 public:
  Protocol protocol() const override { return Protocol::FmlpS; }
  WaitingSemantics waiting_semantics() const override { return WaitingSemantics::Spin; }
  QueueDiscipline discipline() const override { return QueueDiscipline::Fifo; }
  Priority on_acquire(const Semaphore&, Priority) const override { return Priority::top(); }
  std::vector<Effect> on_wait(const Semaphore&, const Waiter& w) const override {
    return {StartSpin{w.task, Priority::top()}};
  }
};

}  // namespace

std::unique_ptr<ProtocolHooks> make_hooks(Protocol protocol) {
  switch (protocol) {
    case Protocol::Mpcp: return std::make_unique<MpcpHooks>();
    case Protocol::Dpcp: return std::make_unique<DpcpHooks>();
    case Protocol::FmlpL: return std::make_unique<FmlpLongHooks>(Protocol::FmlpL);
    case Protocol::FmlpS: return std::make_unique<FmlpShortHooks>();
    case Protocol::Dflp: return std::make_unique<FmlpLongHooks>(Protocol::Dflp);
  }
  throw SyncError("unknown protocol");
}

SyncManager::SyncManager(const Scenario& scenario, std::vector<Priority> base_priorities)
    : hooks_(make_hooks(scenario.system.protocol)),
      base_(std::move(base_priorities)),
      held_(base_.size()),
      waiting_(base_.size()) {
  semaphores_.reserve(scenario.resources.size());
  for (std::size_t i = 0; i < scenario.resources.size(); ++i) {
    Semaphore sem;
    sem.resource = i;
    sem.id = scenario.resources[i].id;
    sem.discipline = hooks_->discipline();
    sem.ceiling = scenario.resources[i].ceiling;
    semaphores_.push_back(std::move(sem));
  }
}

void SyncManager::enqueue(Semaphore& sem, const Waiter& waiter) {
  auto pos = sem.wait_queue.end();
  if (sem.discipline == QueueDiscipline::Priority) {
    // behind every waiter at least as urgent: FIFO among equal priorities
    pos = std::find_if(sem.wait_queue.begin(), sem.wait_queue.end(),
                       [&](const Waiter& w) { return waiter.base.more_urgent_than(w.base); });
  }
  sem.wait_queue.insert(pos, waiter);
}

ObtainResult SyncManager::obtain(TaskIndex task, std::size_t resource, TimeNs now,
                                 Priority current) {
  if (held_.at(task) || waiting_.at(task)) {
    throw SyncError("nested access rejected: task " + std::to_string(task) + " requested resource " +
                    std::to_string(semaphores_.at(resource).id) + " while holding or waiting");
  }
  auto& sem = semaphores_.at(resource);
  if (!sem.owner) {
    sem.owner = task;
    sem.owner_saved = current;
    held_[task] = resource;
    return {ObtainStatus::Acquired, {SetPriority{task, hooks_->on_acquire(sem, current)}}};
  }
  Waiter w{task, base_.at(task), current, now, ++sem.arrivals};
  enqueue(sem, w);
  waiting_[task] = resource;
  return {ObtainStatus::Waiting, hooks_->on_wait(sem, w)};
}

ReleaseResult SyncManager::release(TaskIndex task, std::size_t resource, TimeNs) {
  auto& sem = semaphores_.at(resource);
  if (!sem.owner || *sem.owner != task) {
    return {ReleaseStatus::NotOwner, std::nullopt, {}};
  }
  ReleaseResult result{ReleaseStatus::Released, std::nullopt, hooks_->on_release(sem)};
  held_[task].reset();
  if (sem.wait_queue.empty()) {
    sem.owner.reset();
    sem.owner_saved = Priority::parked();
    return result;
  }
  const Waiter next = sem.wait_queue.front();
  sem.wait_queue.erase(sem.wait_queue.begin());
  sem.owner = next.task;
  sem.owner_saved = next.saved;
  waiting_[next.task].reset();
  held_[next.task] = resource;
  result.next_owner = next.task;
  result.effects.push_back(Grant{next.task, hooks_->on_acquire(sem, next.saved)});
  return result;
}

}  // namespace rtsim
