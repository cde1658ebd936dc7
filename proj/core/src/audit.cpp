#include "rtsim/audit.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "rtsim/metrics.hpp"

namespace rtsim {

namespace {

constexpr std::size_t kMaxFindings = 40;

using JobKey = std::pair<TaskId, std::uint64_t>;

JobKey key(const Event& e) { return {e.task, e.job}; }

class Sink {
 public:
  template <typename... Parts>
  void add(const Event& e, const Parts&... parts) {
    if (out_.size() >= kMaxFindings) return;
    std::ostringstream s;
    s << "t=" << e.time << " seq=" << e.sequence << " " << to_string(e.kind) << " task "
      << e.task << " job " << e.job << ": ";
    (s << ... << parts);
    out_.push_back(s.str());
  }
  template <typename... Parts>
  void note(const Parts&... parts) {
    if (out_.size() >= kMaxFindings) return;
    std::ostringstream s;
    (s << ... << parts);
    out_.push_back(s.str());
  }
  Findings take() { return std::move(out_); }

 private:
  Findings out_;
};

std::map<TaskId, Priority> base_priorities(const Scenario& s) {
  std::map<TaskId, Priority> m;
  for (const auto& t : s.tasks) m[t.id] = t.priority;
  return m;
}

const TaskSpec* task_spec(const Scenario& s, TaskId id) {
  for (const auto& t : s.tasks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

struct Pending {
  JobKey job;
  Priority base;
  std::uint64_t sequence;
};

}  // namespace

Findings audit_mutual_exclusion(const Trace& trace) {
  Sink sink;
  std::map<ResourceId, JobKey> owner;
  for (const auto& e : trace.events) {
    if (!e.resource) continue;
    if (e.kind == EventKind::CsAcquire) {
      auto [it, fresh] = owner.emplace(*e.resource, key(e));
      if (!fresh) {
        sink.add(e, "resource ", *e.resource, " already held by task ", it->second.first, " job ",
                 it->second.second);
      }
    } else if (e.kind == EventKind::CsRelease) {
      auto it = owner.find(*e.resource);
      if (it == owner.end() || it->second != key(e)) {
        sink.add(e, "releases resource ", *e.resource, " it does not hold");
      } else {
        owner.erase(it);
      }
    }
  }
  return sink.take();
}

Findings audit_event_legality(const Trace& trace) {
  Sink sink;
  enum class Lock { Requested, Held };
  std::map<std::pair<JobKey, ResourceId>, Lock> locks;
  std::map<JobKey, EventDetail> overhead;
  std::set<JobKey> released, completed;
  const Event* prev = nullptr;
  for (const auto& e : trace.events) {
    if (prev && (e.time < prev->time || e.sequence <= prev->sequence)) {
      sink.add(e, "out of (time, sequence) order");
    }
    prev = &e;
    if (e.time < 0 || e.time > trace.horizon) sink.add(e, "outside [0, horizon]");
    const auto job = key(e);
    if (e.kind == EventKind::JobRelease) {
      if (!released.insert(job).second) sink.add(e, "released twice");
      continue;
    }
    if (!released.contains(job)) sink.add(e, "event before the job's release");
    if (completed.contains(job)) sink.add(e, "event after the job's completion");
    switch (e.kind) {
      case EventKind::CsRequest:
      case EventKind::CsAcquire:
      case EventKind::CsRelease: {
        if (!e.resource) {
          sink.add(e, "missing resource");
          break;
        }
        auto lk = std::pair(job, *e.resource);
        auto it = locks.find(lk);
        if (e.kind == EventKind::CsRequest) {
          if (it != locks.end()) {
            sink.add(e, "request while already requesting or holding");
          } else if (std::any_of(locks.begin(), locks.end(),
                                 [&](const auto& l) { return l.first.first == job; })) {
            // A second resource would give the wait-for graph a path of length 2.
            sink.add(e, "nested request");
          }
          locks[lk] = Lock::Requested;
        } else if (e.kind == EventKind::CsAcquire) {
          if (it == locks.end() || it->second != Lock::Requested) {
            sink.add(e, "acquire without a matching request");
          }
          locks[lk] = Lock::Held;
        } else {
          if (it == locks.end() || it->second != Lock::Held) {
            sink.add(e, "release without a matching acquire");
          } else {
            locks.erase(it);
          }
        }
        break;
      }
      case EventKind::OverheadBegin:
        if (overhead.contains(job)) sink.add(e, "nested overhead slice");
        overhead[job] = e.detail;
        break;
      case EventKind::OverheadEnd: {
        auto it = overhead.find(job);
        if (it == overhead.end() || it->second != e.detail) {
          sink.add(e, "overhead end without matching begin");
        } else {
          overhead.erase(it);
        }
        break;
      }
      case EventKind::JobComplete: {
        completed.insert(job);
        for (const auto& [lk, state] : locks) {
          if (lk.first == job) sink.add(e, "completes while requesting or holding a resource");
        }
        if (overhead.contains(job)) sink.add(e, "completes inside an overhead slice");
        break;
      }
      default: break;
    }
  }
  return sink.take();
}

Findings audit_ceiling_and_grant_order(const Trace& trace, const Scenario& scenario) {
  Sink sink;
  if (!uses_static_ceiling(scenario.system.protocol)) return sink.take();
  const auto base = base_priorities(scenario);
  std::map<ResourceId, Priority> ceiling;
  for (const auto& r : scenario.resources) {
    if (r.ceiling) ceiling[r.id] = *r.ceiling;
  }
  std::map<JobKey, ResourceId> holding;
  std::map<ResourceId, std::vector<Pending>> pending;
  for (const auto& e : trace.events) {
    const auto job = key(e);
    if (e.kind == EventKind::CsRequest && e.resource) {
      pending[*e.resource].push_back({job, base.at(e.task), e.sequence});
    }
    if (e.kind == EventKind::CsAcquire && e.resource) {
      auto& q = pending[*e.resource];
      const Pending* best = nullptr;
      for (const auto& p : q) {
        if (!best || p.base.more_urgent_than(best->base)) best = &p;
      }
      if (!best || best->job != job) {
        sink.add(e, "granted ahead of a more urgent waiter on resource ", *e.resource);
      }
      std::erase_if(q, [&](const Pending& p) { return p.job == job; });
      holding[job] = *e.resource;
    }
    if (auto h = holding.find(job); h != holding.end() && e.priority) {
      const Priority c = ceiling.at(h->second);
      if (*e.priority != c) {
        sink.add(e, "owner of resource ", h->second, " at priority ", to_string(*e.priority),
                 ", ceiling is ", to_string(c));
      }
    }
    if (e.kind == EventKind::CsRelease) holding.erase(job);
  }
  return sink.take();
}

Findings audit_fifo(const Trace& trace, const Scenario& scenario) {
  Sink sink;
  const auto protocol = scenario.system.protocol;
  if (protocol != Protocol::FmlpL && protocol != Protocol::FmlpS && protocol != Protocol::Dflp) {
    return sink.take();
  }
  std::map<ResourceId, std::vector<JobKey>> order;
  std::set<JobKey> owners;
  for (const auto& e : trace.events) {
    const auto job = key(e);
    if (e.kind == EventKind::CsRequest && e.resource) order[*e.resource].push_back(job);
    if (e.kind == EventKind::CsAcquire && e.resource) {
      auto& q = order[*e.resource];
      if (q.empty() || q.front() != job) {
        sink.add(e, "acquires resource ", *e.resource, " out of FIFO order");
      }
      std::erase(q, job);
      owners.insert(job);
    }
    if (e.kind == EventKind::CsRelease) owners.erase(job);
    if (protocol == Protocol::FmlpS && e.kind == EventKind::Preempt && owners.contains(job)) {
      sink.add(e, "resource owner preempted under fmlp-s");
    }
  }
  return sink.take();
}

Findings audit_locality(const Trace& trace, const Scenario& scenario) {
  Sink sink;
  if (!is_distributed(scenario.system.protocol)) return sink.take();
  std::map<ResourceId, ProcessorId> sync_of;
  for (const auto& r : scenario.resources) {
    if (r.sync_processor) sync_of[r.id] = *r.sync_processor;
  }
  struct JobView {
    ProcessorId home = 0;
    ProcessorId location = 0;
    std::size_t released_sections = 0;
    std::optional<bool> expect_back;
    std::uint32_t migrations = 0;
  };
  std::map<JobKey, JobView> jobs;

  // Migrations a complete job of `t` performs.
  auto expected_migrations = [&](const TaskSpec& t) {
    std::uint32_t n = 0;
    ProcessorId loc = t.home_processor;
    const auto& cs = t.critical_sections;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const auto target = sync_of.at(cs[k].resource);
      if (loc != target) {
        ++n;
        loc = target;
      }
      const TimeNs next = k + 1 < cs.size() ? cs[k + 1].offset : t.wcet;
      if (next > cs[k].end() && loc != t.home_processor) {
        ++n;
        loc = t.home_processor;
      }
    }
    return n;
  };

  for (const auto& e : trace.events) {
    const auto job = key(e);
    if (e.kind == EventKind::JobRelease) {
      JobView fresh;
      fresh.home = fresh.location = e.processor;
      jobs[job] = fresh;
      continue;
    }
    auto& v = jobs[job];
    const bool pivot = e.kind == EventKind::MigrateBack || e.kind == EventKind::MigrateTo ||
                       e.kind == EventKind::CsRequest || e.kind == EventKind::JobComplete;
    if (pivot && v.expect_back) {
      const bool back = e.kind == EventKind::MigrateBack;
      if (*v.expect_back && !back) {
        sink.add(e, "non-critical work remains but the job did not migrate back");
      } else if (!*v.expect_back && back) {
        sink.add(e, "migrates back with no non-critical work left");
      }
      v.expect_back.reset();
    }
    switch (e.kind) {
      case EventKind::MigrateTo:
      case EventKind::MigrateBack:
        if (e.detail != EventDetail::Noop) {
          v.location = e.processor;
          v.migrations++;
        }
        if (e.kind == EventKind::MigrateBack && e.processor != v.home) {
          sink.add(e, "migrates back to ", e.processor, ", home is ", v.home);
        }
        break;
      case EventKind::CsRequest:
        if (e.resource && v.location != sync_of.at(*e.resource)) {
          sink.add(e, "requests resource ", *e.resource, " on processor ", v.location,
                   " instead of its synchronization processor");
        }
        break;
      case EventKind::CsAcquire:
      case EventKind::CsRelease:
        if (!scenario.system.is_synchronization(e.processor)) {
          sink.add(e, "on application processor ", e.processor);
        }
        if (e.kind == EventKind::CsRelease) {
          const auto* spec = task_spec(scenario, e.task);
          const auto k = v.released_sections++;
          if (spec && k < spec->critical_sections.size()) {
            const auto& cs = spec->critical_sections;
            const TimeNs next = k + 1 < cs.size() ? cs[k + 1].offset : spec->wcet;
            v.expect_back = next > cs[k].end();
          }
        }
        break;
      case EventKind::JobComplete:
        if (const auto* spec = task_spec(scenario, e.task)) {
          const auto want = expected_migrations(*spec);
          if (v.migrations != want) {
            sink.add(e, "completed after ", v.migrations, " migrations, expected ", want);
          }
        }
        break;
      default: break;
    }
  }
  return sink.take();
}

Findings audit_conservation(const Trace& trace, const Scenario& scenario) {
  Sink sink;
  const auto rebuilt = replay(trace, scenario);
  if (trace.processors.size() != rebuilt.processors.size()) {
    sink.note("trace has ", trace.processors.size(), " processor accounts, scenario has ",
              rebuilt.processors.size(), " processors");
    return sink.take();
  }
  TimeNs execution = 0, spin = 0;
  for (std::size_t p = 0; p < trace.processors.size(); ++p) {
    const auto& a = trace.processors[p];
    const auto& b = rebuilt.processors[p];
    if (a.busy() + a.idle != trace.horizon) {
      sink.note("processor ", p, ": busy ", a.busy(), " + idle ", a.idle, " != horizon ",
                trace.horizon);
    }
    if (!(a == b)) {
      sink.note("processor ", p, ": account (exec ", a.execution, ", spin ", a.spin,
                ", overhead ", a.overhead, ", idle ", a.idle, ") disagrees with replay (exec ",
                b.execution, ", spin ", b.spin, ", overhead ", b.overhead, ", idle ", b.idle, ")");
    }
    execution += a.execution;
    spin += a.spin;
  }
  TimeNs job_execution = 0, job_spin = 0;
  for (const auto& j : rebuilt.jobs) {
    job_execution += j.execution;
    job_spin += j.spinning;
    if (j.completion && j.accounted() != *j.response()) {
      sink.note("task ", j.task, " job ", j.job, ": decomposition ", j.accounted(),
                " != response ", *j.response());
    }
  }
  if (job_execution != execution) {
    sink.note("job execution ", job_execution, " != processor execution ", execution);
  }
  if (job_spin != spin) sink.note("job spinning ", job_spin, " != processor spin ", spin);
  if (scenario.system.protocol != Protocol::FmlpS && spin != 0) {
    sink.note("suspension-based protocol accumulated ", spin, " ns of spinning");
  }

  if (trace.jobs.size() != rebuilt.jobs.size()) {
    sink.note("trace lists ", trace.jobs.size(), " jobs, replay finds ", rebuilt.jobs.size());
    return sink.take();
  }
  for (std::size_t k = 0; k < trace.jobs.size(); ++k) {
    const auto& a = trace.jobs[k];
    const auto& b = rebuilt.jobs[k];
    const bool same = a.task == b.task && a.job == b.job && a.release == b.release &&
                      a.abs_deadline == b.abs_deadline && a.completion == b.completion &&
                      a.executed == b.execution && a.overhead == b.overhead &&
                      a.blocking == b.suspended + b.spinning && a.migrations == b.migrations &&
                      a.missed == b.missed;
    if (!same) sink.note("job summary for task ", a.task, " job ", a.job, " disagrees with replay");
  }
  return sink.take();
}

Findings audit_all(const Trace& trace, const Scenario& scenario) {
  Findings all;
  for (auto part : {audit_event_legality(trace), audit_mutual_exclusion(trace),
                    audit_ceiling_and_grant_order(trace, scenario), audit_fifo(trace, scenario),
                    audit_locality(trace, scenario), audit_conservation(trace, scenario)}) {
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

}  // namespace rtsim
