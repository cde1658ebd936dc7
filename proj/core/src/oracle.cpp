#include "rtsim/oracle.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace rtsim {

std::string guard_violation(const Scenario& scenario, TimeNs horizon, const OracleGuard& guard) {
  std::ostringstream why;
  if (scenario.tasks.size() > guard.max_tasks) {
    why << scenario.tasks.size() << " tasks exceed the oracle limit of " << guard.max_tasks << "; ";
  }
  if (scenario.resources.size() > guard.max_resources) {
    why << scenario.resources.size() << " resources exceed the oracle limit of "
        << guard.max_resources << "; ";
  }
  if (horizon > guard.max_horizon) {
    why << "horizon " << horizon << " ns exceeds the oracle limit of " << guard.max_horizon
        << " ns; ";
  }
  auto text = why.str();
  if (!text.empty()) text.resize(text.size() - 2);
  return text;
}

namespace {

// Everything below is deliberately naive: small arrays, linear scans, one
// tick per nanosecond.

enum Seg { kExec, kOvh, kMigTo, kMigBack, kReq, kCs, kRel, kDone };

struct Segment {
  Seg kind;
  TimeNs len = 0;
  int res = -1;
  int target = -1;
  EventDetail ovh = EventDetail::None;
};

enum NodeSt { kBlocked, kReady, kRunning };

struct Node {
  NodeSt st = kBlocked;
  std::uint32_t prio = Priority::parked().value();
  long long stamp = 0;
};

enum JobPhase { kWork, kWait, kSpin, kCsPhase, kGone };

struct Task {
  std::vector<Segment> segs;
  // live job
  bool live = false;
  std::uint64_t number = 0;
  TimeNs release = 0;
  TimeNs deadline = 0;
  std::size_t cursor = 0;
  bool entered = false;
  TimeNs left = 0;
  bool in_ctx = false;
  TimeNs ctx_left = 0;
  int loc = 0;
  JobPhase phase = kWork;
  bool missed = false;
  TimeNs executed = 0, blocking = 0, overhead = 0;
  std::uint32_t migrations = 0;
  std::deque<std::pair<std::uint64_t, TimeNs>> pending;  // (number, release)
  std::vector<bool> pending_missed;
  std::uint64_t released = 0;
  bool pinned = false;
  std::vector<Node> nodes;
};

struct Sem {
  int owner = -1;
  std::uint32_t owner_saved = 0;
  struct W {
    int task;
    std::uint32_t base;
    std::uint32_t saved;
  };
  std::vector<W> queue;
};

class Oracle {
 public:
  Oracle(const Scenario& s, TimeNs horizon) : s_(s), horizon_(horizon) {
    m_ = static_cast<int>(s.system.processors);
    running_.assign(m_, -1);
    tasks_.resize(s.tasks.size());
    sems_.resize(s.resources.size());
    trace_.protocol = s.system.protocol;
    trace_.horizon = horizon;
    trace_.processors.resize(m_);
    for (std::size_t i = 0; i < s.tasks.size(); ++i) {
      tasks_[i].segs = expand(s.tasks[i]);
      tasks_[i].nodes.resize(m_);
    }
  }

  Trace simulate() {
    for (TimeNs t = 0;; ++t) {
      now_ = t;
      do_instant();
      if (t == horizon_) break;
      tick();
    }
    wrap_up();
    return trace_;
  }

 private:
  bool fifo() const {
    auto p = s_.system.protocol;
    return p == Protocol::FmlpL || p == Protocol::FmlpS || p == Protocol::Dflp;
  }
  bool spin() const { return s_.system.protocol == Protocol::FmlpS; }
  bool remote() const {
    auto p = s_.system.protocol;
    return p == Protocol::Dpcp || p == Protocol::Dflp;
  }
  std::uint32_t base(int i) const { return s_.tasks[i].priority.value(); }

  int res_index(ResourceId id) const {
    for (std::size_t r = 0; r < s_.resources.size(); ++r) {
      if (s_.resources[r].id == id) return static_cast<int>(r);
    }
    return -1;
  }

  std::vector<Segment> expand(const TaskSpec& task) const {
    const auto& o = s_.system.overheads;
    std::vector<Segment> out;
    int where = static_cast<int>(task.home_processor);
    TimeNs done = 0;
    const auto& cs = task.critical_sections;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      int r = res_index(cs[k].resource);
      if (cs[k].offset - done > 0) out.push_back({kExec, cs[k].offset - done});
      if (remote()) {
        int sp = static_cast<int>(*s_.resources[r].sync_processor);
        if (where != sp) {
          if (o.migrate_to > 0) out.push_back({kOvh, o.migrate_to, -1, -1, EventDetail::MigTo});
          out.push_back({kMigTo, 0, r, sp});
          where = sp;
        }
      }
      if (o.lock > 0) out.push_back({kOvh, o.lock, -1, -1, EventDetail::Lock});
      out.push_back({kReq, 0, r});
      out.push_back({kCs, cs[k].length, r});
      if (o.unlock > 0) out.push_back({kOvh, o.unlock, -1, -1, EventDetail::Unlock});
      out.push_back({kRel, 0, r});
      done = cs[k].offset + cs[k].length;
      TimeNs upcoming = (k + 1 < cs.size() ? cs[k + 1].offset : task.wcet) - done;
      int home = static_cast<int>(task.home_processor);
      if (where != home && upcoming > 0) {
        if (o.migrate_back > 0) {
          out.push_back({kOvh, o.migrate_back, -1, -1, EventDetail::MigBack});
        }
        out.push_back({kMigBack, 0, r, home});
        where = home;
      }
    }
    if (task.wcet - done > 0) out.push_back({kExec, task.wcet - done});
    out.push_back({kDone});
    return out;
  }

  void log(EventKind kind, int i, int proc, int res = -1, long long prio = -1,
           EventDetail d = EventDetail::None, std::uint64_t number = ~0ULL) {
    Event e;
    e.time = now_;
    e.sequence = trace_.events.size();
    e.kind = kind;
    e.task = s_.tasks[i].id;
    e.job = number == ~0ULL ? tasks_[i].number : number;
    e.processor = static_cast<ProcessorId>(proc);
    if (res >= 0) e.resource = s_.resources[res].id;
    if (prio >= 0) e.priority = Priority{static_cast<std::uint32_t>(prio)};
    e.detail = d;
    trace_.events.push_back(e);
  }

  // -- scheduling ----------------------------------------------------------

  int active_node(int i) const {
    for (int p = 0; p < m_; ++p) {
      if (tasks_[i].nodes[p].st != kBlocked) return p;
    }
    return -1;
  }

  void ready(int i, int p, std::uint32_t prio) {
    auto& tk = tasks_[i];
    for (int q = 0; q < m_; ++q) {
      if (q != p && q != static_cast<int>(s_.tasks[i].home_processor) &&
          tk.nodes[q].st == kBlocked) {
        tk.nodes[q].prio = Priority::parked().value();
      }
    }
    tk.nodes[p] = {kReady, prio, ++tail_};
  }

  void unready(int i) {
    int p = active_node(i);
    if (running_[p] == i) running_[p] = -1;
    tasks_[i].nodes[p].st = kBlocked;
    tasks_[i].pinned = false;
  }

  void reschedule_all() {
    for (int p = 0; p < m_; ++p) {
      int best = -1;
      for (int i = 0; i < static_cast<int>(tasks_.size()); ++i) {
        const auto& n = tasks_[i].nodes[p];
        if (n.st != kReady) continue;
        if (best < 0) {
          best = i;
          continue;
        }
        const auto& b = tasks_[best].nodes[p];
        if (n.prio < b.prio || (n.prio == b.prio && n.stamp < b.stamp)) best = i;
      }
      if (best < 0) continue;
      int cur = running_[p];
      if (cur >= 0) {
        if (tasks_[cur].pinned) continue;
        if (tasks_[best].nodes[p].prio >= tasks_[cur].nodes[p].prio) continue;
        tasks_[cur].nodes[p].st = kReady;
        tasks_[cur].nodes[p].stamp = --head_;
        log(EventKind::Preempt, cur, p, -1, tasks_[cur].nodes[p].prio);
      }
      tasks_[best].nodes[p].st = kRunning;
      running_[p] = best;
      log(EventKind::Dispatch, best, p, -1, tasks_[best].nodes[p].prio);
      if (s_.system.overheads.context_switch > 0) {
        tasks_[best].in_ctx = true;
        tasks_[best].ctx_left = s_.system.overheads.context_switch;
        tasks_[best].pinned = true;
        log(EventKind::OverheadBegin, best, p, -1, -1, EventDetail::Ctx);
      }
    }
  }

  // -- resources -----------------------------------------------------------

  std::uint32_t grant_priority(int r, std::uint32_t saved) const {
    switch (s_.system.protocol) {
      case Protocol::Mpcp:
      case Protocol::Dpcp:
        return s_.resources[r].ceiling->value();
      case Protocol::FmlpS:
        return 0;
      case Protocol::FmlpL:
      case Protocol::Dflp: {
        std::uint32_t best = saved;
        for (const auto& w : sems_[r].queue) best = std::min(best, w.base);
        return best;
      }
    }
    return saved;
  }

  void set_prio(int i, std::uint32_t prio) {
    auto& n = tasks_[i].nodes[tasks_[i].loc];
    n.prio = prio;
  }

  void begin_cs(int i, int r, std::uint32_t prio) {
    auto& tk = tasks_[i];
    tk.cursor++;  // onto the CS segment
    tk.entered = true;
    tk.left = tk.segs[tk.cursor].len;
    tk.phase = kCsPhase;
    log(EventKind::CsAcquire, i, tk.loc, r, prio);
  }

  // -- actions -------------------------------------------------------------

  int klass(int i) const {
    const auto& tk = tasks_[i];
    if (tk.in_ctx) return tk.ctx_left == 0 ? 3 : -1;
    if (tk.phase == kSpin || tk.phase == kWait) return -1;
    std::size_t c = tk.cursor;
    Seg k = tk.segs[c].kind;
    if ((k == kExec || k == kOvh || k == kCs) && tk.entered) {
      if (tk.left > 0) return -1;
      k = tk.segs[c + 1].kind;
    }
    switch (k) {
      case kRel: return 0;
      case kDone: return 1;
      case kMigTo:
      case kMigBack: return 2;
      case kReq: return 4;
      default: return 3;
    }
  }

  bool act_once() {
    int who = -1, best = 99;
    for (int p = 0; p < m_; ++p) {
      int i = running_[p];
      if (i < 0) continue;
      int k = klass(i);
      if (k >= 0 && k < best) {
        best = k;
        who = i;
      }
    }
    if (who < 0) return false;
    act(who);
    return true;
  }

  void act(int i) {
    auto& tk = tasks_[i];
    if (tk.in_ctx) {
      tk.in_ctx = false;
      tk.pinned = false;
      log(EventKind::OverheadEnd, i, tk.loc, -1, -1, EventDetail::Ctx);
      return;
    }
    Segment seg = tk.segs[tk.cursor];
    if ((seg.kind == kExec || seg.kind == kOvh || seg.kind == kCs) && tk.entered) {
      if (seg.kind == kOvh) {
        tk.pinned = false;
        log(EventKind::OverheadEnd, i, tk.loc, -1, -1, seg.ovh);
      }
      tk.cursor++;
      tk.entered = false;
      seg = tk.segs[tk.cursor];
    }
    const int p = tk.loc;
    switch (seg.kind) {
      case kExec:
        tk.entered = true;
        tk.left = seg.len;
        tk.phase = kWork;
        break;
      case kOvh:
        tk.entered = true;
        tk.left = seg.len;
        tk.phase = seg.ovh == EventDetail::Unlock ? kCsPhase : kWork;
        tk.pinned = true;
        log(EventKind::OverheadBegin, i, p, -1, -1, seg.ovh);
        break;
      case kReq: {
        auto& sem = sems_[seg.res];
        std::uint32_t now_prio = tk.nodes[p].prio;
        log(EventKind::CsRequest, i, p, seg.res, now_prio);
        if (sem.owner < 0) {
          sem.owner = i;
          sem.owner_saved = now_prio;
          std::uint32_t g = grant_priority(seg.res, now_prio);
          set_prio(i, g);
          begin_cs(i, seg.res, g);
          break;
        }
        Sem::W w{i, base(i), now_prio};
        auto at = sem.queue.end();
        if (!fifo()) {
          for (auto it = sem.queue.begin(); it != sem.queue.end(); ++it) {
            if (w.base < it->base) {
              at = it;
              break;
            }
          }
        }
        sem.queue.insert(at, w);
        if (spin()) {
          tk.phase = kSpin;
          set_prio(i, 0);
        } else {
          tk.phase = kWait;
          log(EventKind::Suspend, i, p, seg.res, now_prio);
          unready(i);
          if (s_.system.protocol == Protocol::FmlpL || s_.system.protocol == Protocol::Dflp) {
            set_prio(sem.owner, grant_priority(seg.res, sem.owner_saved));
          }
        }
        break;
      }
      case kRel: {
        auto& sem = sems_[seg.res];
        log(EventKind::CsRelease, i, p, seg.res, tk.nodes[p].prio);
        set_prio(i, sem.owner_saved);
        tk.cursor++;
        tk.entered = false;
        tk.phase = kWork;
        if (sem.queue.empty()) {
          sem.owner = -1;
          break;
        }
        auto head = sem.queue.front();
        sem.queue.erase(sem.queue.begin());
        sem.owner = head.task;
        sem.owner_saved = head.saved;
        std::uint32_t g = grant_priority(seg.res, head.saved);
        auto& nx = tasks_[head.task];
        bool was_waiting = nx.phase == kWait;
        set_prio(head.task, g);
        begin_cs(head.task, seg.res, g);
        if (was_waiting) {
          log(EventKind::Resume, head.task, nx.loc, seg.res, g);
          ready(head.task, nx.loc, g);
        }
        break;
      }
      case kMigTo:
      case kMigBack: {
        log(seg.kind == kMigTo ? EventKind::MigrateTo : EventKind::MigrateBack, i, seg.target,
            seg.res, base(i));
        const int from = tk.loc;
        unready(i);
        if (from != static_cast<int>(s_.tasks[i].home_processor)) {
          tk.nodes[from].prio = Priority::parked().value();
        }
        tk.nodes[seg.target] = {kReady, base(i), ++tail_};
        tk.loc = seg.target;
        tk.migrations++;
        tk.cursor++;
        tk.entered = false;
        break;
      }
      case kDone: {
        log(EventKind::JobComplete, i, p, -1, tk.nodes[p].prio);
        unready(i);
        summarize(i, now_);
        tk.live = false;
        if (!tk.pending.empty()) {
          auto [num, rel] = tk.pending.front();
          bool was_missed = tk.pending_missed.front();
          tk.pending.pop_front();
          tk.pending_missed.erase(tk.pending_missed.begin());
          start(i, num, rel, was_missed);
        }
        break;
      }
      case kCs:
        throw std::logic_error("oracle: critical section without acquisition");
    }
  }

  void start(int i, std::uint64_t number, TimeNs rel, bool missed) {
    auto& tk = tasks_[i];
    const auto& spec = s_.tasks[i];
    tk.live = true;
    tk.number = number;
    tk.release = rel;
    tk.deadline = rel + spec.deadline;
    tk.cursor = 0;
    tk.entered = false;
    tk.left = 0;
    tk.in_ctx = false;
    tk.loc = static_cast<int>(spec.home_processor);
    tk.phase = kWork;
    tk.missed = missed;
    tk.executed = tk.blocking = tk.overhead = 0;
    tk.migrations = 0;
    ready(i, tk.loc, spec.priority.value());
  }

  void summarize(int i, std::optional<TimeNs> done) {
    const auto& tk = tasks_[i];
    JobSummary j;
    j.task = s_.tasks[i].id;
    j.job = tk.number;
    j.release = tk.release;
    j.abs_deadline = tk.deadline;
    j.completion = done;
    j.executed = tk.executed;
    j.blocking = tk.blocking;
    j.overhead = tk.overhead;
    j.migrations = tk.migrations;
    j.missed = tk.missed || (done && *done > tk.deadline);
    trace_.jobs.push_back(j);
  }

  void do_instant() {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const auto& spec = s_.tasks[i];
      if (now_ >= horizon_ || now_ % spec.period != 0) continue;
      auto& tk = tasks_[i];
      const std::uint64_t num = tk.released++;
      log(EventKind::JobRelease, static_cast<int>(i), static_cast<int>(spec.home_processor), -1,
          spec.priority.value(), EventDetail::None, num);
      if (tk.live) {
        tk.pending.emplace_back(num, now_);
        tk.pending_missed.push_back(false);
      } else {
        start(static_cast<int>(i), num, now_, false);
      }
    }
    while (true) {
      while (act_once()) {
      }
      reschedule_all();
      bool more = false;
      for (int p = 0; p < m_; ++p) {
        if (running_[p] >= 0 && klass(running_[p]) >= 0) more = true;
      }
      if (!more) break;
    }
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      auto& tk = tasks_[i];
      const int home = static_cast<int>(s_.tasks[i].home_processor);
      if (tk.live && tk.deadline == now_ && !tk.missed) {
        tk.missed = true;
        log(EventKind::DeadlineCheck, static_cast<int>(i), tk.loc, -1, -1, EventDetail::Miss);
      }
      for (std::size_t k = 0; k < tk.pending.size(); ++k) {
        if (tk.pending[k].second + s_.tasks[i].deadline == now_ && !tk.pending_missed[k]) {
          tk.pending_missed[k] = true;
          log(EventKind::DeadlineCheck, static_cast<int>(i), home, -1, -1, EventDetail::Miss,
              tk.pending[k].first);
        }
      }
    }
  }

  void tick() {
    for (int p = 0; p < m_; ++p) {
      auto& acct = trace_.processors[p];
      int i = running_[p];
      if (i < 0) {
        acct.idle++;
        continue;
      }
      auto& tk = tasks_[i];
      if (tk.in_ctx) {
        tk.ctx_left--;
        tk.overhead++;
        acct.overhead++;
      } else if (tk.phase == kSpin) {
        tk.blocking++;
        acct.spin++;
      } else if (tk.segs[tk.cursor].kind == kOvh) {
        tk.left--;
        tk.overhead++;
        acct.overhead++;
      } else {
        tk.left--;
        tk.executed++;
        acct.execution++;
      }
    }
    for (auto& tk : tasks_) {
      if (tk.live && tk.phase == kWait) tk.blocking++;
    }
  }

  void wrap_up() {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      auto& tk = tasks_[i];
      if (tk.live) summarize(static_cast<int>(i), std::nullopt);
      for (std::size_t k = 0; k < tk.pending.size(); ++k) {
        // never started: a fresh record with nothing accrued
        tk.number = tk.pending[k].first;
        tk.release = tk.pending[k].second;
        tk.deadline = tk.release + s_.tasks[i].deadline;
        tk.missed = tk.pending_missed[k];
        tk.executed = tk.blocking = tk.overhead = 0;
        tk.migrations = 0;
        summarize(static_cast<int>(i), std::nullopt);
      }
    }
    std::stable_sort(trace_.jobs.begin(), trace_.jobs.end(), [](const auto& a, const auto& b) {
      return std::pair(a.release, a.task) < std::pair(b.release, b.task);
    });
  }

  const Scenario& s_;
  TimeNs horizon_;
  TimeNs now_ = 0;
  int m_ = 0;
  std::vector<int> running_;
  std::vector<Task> tasks_;
  std::vector<Sem> sems_;
  long long tail_ = 0;
  long long head_ = 0;
  Trace trace_;
};

}  // namespace

Trace step_oracle(const Scenario& scenario, TimeNs horizon, const OracleGuard& guard) {
  if (auto why = guard_violation(scenario, horizon, guard); !why.empty()) {
    throw OracleGuardError("oracle guard exceeded: " + why);
  }
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (auto report = validate_config(scenario); !report.ok()) {
    throw std::invalid_argument("invalid scenario:\n" + report.to_text());
  }
  return Oracle(scenario, horizon).simulate();
}

std::vector<NormalizedEvent> normalize(const Trace& trace) {
  std::vector<NormalizedEvent> out;
  out.reserve(trace.events.size());
  for (const auto& e : trace.events) {
    out.push_back({e.time, e.kind, e.task, e.job, e.processor, e.resource, e.priority, e.detail});
  }
  return out;
}

namespace {

std::string describe(const NormalizedEvent& e) {
  std::ostringstream out;
  out << "t=" << e.time << ' ' << to_string(e.kind) << " task=" << e.task << " job=" << e.job
      << " cpu=" << e.processor;
  if (e.resource) out << " res=" << *e.resource;
  if (e.priority) out << " prio=" << to_string(*e.priority);
  if (e.detail != EventDetail::None) out << " detail=" << to_string(e.detail);
  return out.str();
}

}  // namespace

std::string diff_traces(const Trace& engine, const Trace& oracle) {
  const auto a = normalize(engine);
  const auto b = normalize(oracle);
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(a[i] == b[i])) {
      return "event " + std::to_string(i) + " differs:\n  engine: " + describe(a[i]) +
             "\n  oracle: " + describe(b[i]) + "\n";
    }
  }
  if (a.size() != b.size()) {
    std::ostringstream out;
    out << "event counts differ: engine " << a.size() << ", oracle " << b.size() << '\n';
    if (a.size() > n) out << "  first extra engine event: " << describe(a[n]) << '\n';
    if (b.size() > n) out << "  first extra oracle event: " << describe(b[n]) << '\n';
    return out.str();
  }
  for (std::size_t p = 0; p < engine.processors.size() && p < oracle.processors.size(); ++p) {
    if (!(engine.processors[p] == oracle.processors[p])) {
      return "processor " + std::to_string(p) + " accounting differs\n";
    }
  }
  if (engine.jobs != oracle.jobs) return "job summaries differ\n";
  return {};
}

}  // namespace rtsim
