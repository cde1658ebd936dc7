#include "rtsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "rtsim/config_io.hpp"

namespace rtsim {

namespace {

enum class JobPhase { Backlog, Ready, Running, Suspended, Done };

struct Live {
  JobPhase phase = JobPhase::Backlog;
  ProcessorId home = 0;
  ProcessorId location = 0;
  bool in_overhead = false;
  bool waiting = false;  // requested, not yet acquired
  Priority base;
};

struct Replayer {
  Replayer(const Trace& t, const Scenario& s) : trace(t), scenario(s) {
    out.processors.resize(s.system.processors);
    running.assign(s.system.processors, -1);
  }

  const Trace& trace;
  const Scenario& scenario;
  Replay out;
  std::vector<Live> live;
  std::vector<int> running;
  std::map<std::pair<TaskId, std::uint64_t>, int> index;
  std::map<TaskId, std::deque<int>> queue;  // unfinished jobs per task
  TimeNs last = 0;

  TimeNs deadline_of(TaskId task) const {
    for (const auto& t : scenario.tasks) {
      if (t.id == task) return t.deadline;
    }
    throw std::invalid_argument("trace mentions unknown task " + std::to_string(task));
  }

  int find(const Event& e) const {
    auto it = index.find({e.task, e.job});
    if (it == index.end()) {
      throw std::invalid_argument("event for unreleased job " + std::to_string(e.task) + "/" +
                                  std::to_string(e.job) + " at t=" + std::to_string(e.time));
    }
    return it->second;
  }

  void credit(TimeNs delta) {
    if (delta <= 0) return;
    for (std::size_t i = 0; i < live.size(); ++i) {
      auto& j = live[i];
      auto& m = out.jobs[i];
      switch (j.phase) {
        case JobPhase::Done: break;
        case JobPhase::Backlog: m.idle_wait += delta; break;
        case JobPhase::Suspended:
          m.blocking += delta;
          m.suspended += delta;
          break;
        case JobPhase::Running:
          if (j.in_overhead) {
            m.overhead += delta;
          } else if (j.waiting) {
            m.blocking += delta;
            m.spinning += delta;
          } else {
            m.execution += delta;
          }
          break;
        case JobPhase::Ready: {
          const int r = running[j.location];
          const bool inversion = r >= 0 && j.base.more_urgent_than(live[r].base);
          if (scenario.system.is_synchronization(j.location) || inversion) {
            m.blocking += delta;
          } else {
            m.interference += delta;
          }
          break;
        }
      }
    }
    for (std::size_t p = 0; p < running.size(); ++p) {
      auto& acct = out.processors[p];
      const int r = running[p];
      if (r < 0) {
        acct.idle += delta;
      } else if (live[r].in_overhead) {
        acct.overhead += delta;
      } else if (live[r].waiting) {
        acct.spin += delta;
      } else {
        acct.execution += delta;
      }
    }
  }

  void leave(int i) {
    auto& j = live[i];
    if (j.phase == JobPhase::Running && running[j.location] == i) running[j.location] = -1;
  }

  void apply(const Event& e) {
    if (e.kind == EventKind::JobRelease) {
      const int i = static_cast<int>(live.size());
      index[{e.task, e.job}] = i;
      Live j;
      j.home = j.location = e.processor;
      j.base = e.priority.value_or(Priority::parked());
      auto& q = queue[e.task];
      j.phase = q.empty() ? JobPhase::Ready : JobPhase::Backlog;
      q.push_back(i);
      live.push_back(j);
      JobMetrics m;
      m.task = e.task;
      m.job = e.job;
      m.release = e.time;
      m.abs_deadline = e.time + deadline_of(e.task);
      out.jobs.push_back(m);
      return;
    }
    const int i = find(e);
    auto& j = live[i];
    auto& m = out.jobs[i];
    switch (e.kind) {
      case EventKind::Dispatch:
        j.phase = JobPhase::Running;
        j.location = e.processor;
        running[e.processor] = i;
        break;
      case EventKind::Preempt:
        leave(i);
        j.phase = JobPhase::Ready;
        break;
      case EventKind::Suspend:
        leave(i);
        j.phase = JobPhase::Suspended;
        break;
      case EventKind::Resume:
        j.phase = JobPhase::Ready;
        j.location = e.processor;
        break;
      case EventKind::MigrateTo:
      case EventKind::MigrateBack:
        if (e.detail == EventDetail::Noop) break;
        leave(i);
        j.phase = JobPhase::Ready;
        j.location = e.processor;
        m.migrations++;
        break;
      case EventKind::OverheadBegin: j.in_overhead = true; break;
      case EventKind::OverheadEnd: j.in_overhead = false; break;
      case EventKind::CsRequest: j.waiting = true; break;
      case EventKind::CsAcquire: j.waiting = false; break;
      case EventKind::CsRelease: break;
      case EventKind::DeadlineCheck:
        if (e.detail == EventDetail::Miss) m.missed = true;
        break;
      case EventKind::JobComplete: {
        leave(i);
        j.phase = JobPhase::Done;
        m.completion = e.time;
        auto& q = queue[e.task];
        if (!q.empty() && q.front() == i) q.pop_front();
        if (!q.empty()) {
          auto& next = live[q.front()];
          next.phase = JobPhase::Ready;
          next.location = next.home;
        }
        break;
      }
      case EventKind::JobRelease: break;
    }
  }

  Replay run() {
    for (const auto& e : trace.events) {
      credit(e.time - last);
      last = std::max(last, e.time);
      apply(e);
    }
    credit(trace.horizon - last);
    std::vector<std::size_t> order(out.jobs.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::pair(out.jobs[a].release, out.jobs[a].task) <
             std::pair(out.jobs[b].release, out.jobs[b].task);
    });
    std::vector<JobMetrics> sorted;
    sorted.reserve(order.size());
    for (auto k : order) sorted.push_back(out.jobs[k]);
    out.jobs = std::move(sorted);
    return std::move(out);
  }
};

std::string_view population_of(EventDetail d) {
  switch (d) {
    case EventDetail::Lock: return "lock";
    case EventDetail::Unlock: return "unlock";
    case EventDetail::MigTo: return "mig_to";
    case EventDetail::MigBack: return "mig_bk";
    case EventDetail::Ctx: return "ctx";
    default: return {};
  }
}

}  // namespace

Replay replay(const Trace& trace, const Scenario& scenario) {
  return Replayer(trace, scenario).run();
}

std::optional<TimeNs> percentile(std::vector<TimeNs> samples, double q) {
  if (samples.empty()) return std::nullopt;
  if (!(q > 0.0) || q > 100.0) throw std::invalid_argument("percentile must lie in (0, 100]");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  return samples[rank - 1];
}

Distribution describe(const std::vector<TimeNs>& samples) {
  Distribution d;
  d.count = samples.size();
  if (samples.empty()) return d;
  auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  d.min = *lo;
  d.max = *hi;
  long double sum = 0;
  for (auto s : samples) sum += static_cast<long double>(s);
  d.avg = static_cast<double>(sum / static_cast<long double>(samples.size()));
  d.p50 = *percentile(samples, 50);
  d.p90 = *percentile(samples, 90);
  d.p99 = *percentile(samples, 99);
  return d;
}

ProtocolStats summarize(const Trace& trace, const Scenario& scenario) {
  ProtocolStats stats;
  stats.protocol = trace.protocol;
  stats.horizon = trace.horizon;
  stats.jobs = replay(trace, scenario).jobs;
  for (auto name : kPopulations) stats.populations[std::string(name)];

  // Overhead populations.
  struct Open {
    TimeNs begin = 0;
    TimeNs lock_path = 0;
    std::optional<std::size_t> unlock_sample;
    TimeNs unlock_acc = 0;
  };
  std::map<std::pair<TaskId, std::uint64_t>, Open> open;
  auto& lock_path = stats.populations["lock_path"];
  auto& unlock_path = stats.populations["unlock_path"];
  for (const auto& e : trace.events) {
    auto& o = open[{e.task, e.job}];
    switch (e.kind) {
      case EventKind::OverheadBegin:
        o.begin = e.time;
        if (e.detail != EventDetail::MigBack && e.detail != EventDetail::Ctx) o.unlock_sample.reset();
        break;
      case EventKind::OverheadEnd: {
        const TimeNs d = e.time - o.begin;
        stats.populations[std::string(population_of(e.detail))].push_back(
            {e.task, e.job, e.time, d});
        if (e.detail == EventDetail::MigTo || e.detail == EventDetail::Lock) o.lock_path += d;
        if (e.detail == EventDetail::Unlock) o.unlock_acc += d;
        if (e.detail == EventDetail::MigBack && o.unlock_sample) {
          unlock_path[*o.unlock_sample].value += d;
          unlock_path[*o.unlock_sample].time = e.time;
          o.unlock_sample.reset();
        }
        break;
      }
      case EventKind::CsRequest:
        lock_path.push_back({e.task, e.job, e.time, o.lock_path});
        o.lock_path = 0;
        o.unlock_sample.reset();
        break;
      case EventKind::CsRelease:
        unlock_path.push_back({e.task, e.job, e.time, o.unlock_acc});
        o.unlock_sample = unlock_path.size() - 1;
        o.unlock_acc = 0;
        break;
      case EventKind::JobComplete: o.unlock_sample.reset(); break;
      default: break;
    }
  }

  std::vector<TimeNs> all;
  std::map<TaskId, std::vector<TimeNs>> per_task;
  std::map<TaskId, TaskStats> tasks;
  for (const auto& t : scenario.tasks) tasks[t.id].task = t.id;
  for (const auto& j : stats.jobs) {
    auto& ts = tasks[j.task];
    ts.task = j.task;
    ts.blocking_total += j.blocking;
    ts.migrations += j.migrations;
    if (j.missed) {
      ts.misses++;
      stats.misses++;
    }
    if (auto r = j.response()) {
      ts.jobs++;
      stats.completed++;
      per_task[j.task].push_back(*r);
      all.push_back(*r);
    } else {
      ts.censored++;
      stats.censored++;
    }
  }
  for (auto& [id, ts] : tasks) {
    ts.response = describe(per_task[id]);
    stats.tasks.push_back(ts);
  }
  stats.response = describe(all);
  return stats;
}

std::string events_csv(const Trace& trace) {
  std::string out = "time,seq,kind,task,job,processor,resource,priority,detail\n";
  for (const auto& e : trace.events) {
    out += std::to_string(e.time);
    out += ',';
    out += std::to_string(e.sequence);
    out += ',';
    out += to_string(e.kind);
    out += ',';
    out += std::to_string(e.task);
    out += ',';
    out += std::to_string(e.job);
    out += ',';
    out += std::to_string(e.processor);
    out += ',';
    if (e.resource) out += std::to_string(*e.resource);
    out += ',';
    if (e.priority) out += std::to_string(e.priority->value());
    out += ',';
    out += to_string(e.detail);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const ProtocolStats& stats) {
  std::string out = "task,jobs,rt_min,rt_avg,rt_max,blocking_total,migrations,misses\n";
  for (const auto& t : stats.tasks) {
    out += std::to_string(t.task) + ',' + std::to_string(t.jobs) + ',';
    if (t.response.count > 0) {
      char avg[64];
      std::snprintf(avg, sizeof avg, "%.3f", t.response.avg);
      out += std::to_string(t.response.min) + ',' + avg + ',' + std::to_string(t.response.max);
    } else {
      out += ",,";
    }
    out += ',' + std::to_string(t.blocking_total) + ',' + std::to_string(t.migrations) + ',' +
           std::to_string(t.misses) + '\n';
  }
  return out;
}

std::string samples_csv(const ProtocolStats& stats) {
  std::string out = "population,task,job,time,value\n";
  for (auto name : kPopulations) {
    auto it = stats.populations.find(name);
    if (it == stats.populations.end()) continue;
    for (const auto& s : it->second) {
      out += std::string(name) + ',' + std::to_string(s.task) + ',' + std::to_string(s.job) + ',' +
             std::to_string(s.time) + ',' + std::to_string(s.value) + '\n';
    }
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* name) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw std::invalid_argument("events.csv line " + std::to_string(line) + ": bad " + name +
                                " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<Event> parse_events_csv(std::string_view text) {
  std::vector<Event> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != "time,seq,kind,task,job,processor,resource,priority,detail") {
        throw std::invalid_argument("events.csv line 1: unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9) {
      throw std::invalid_argument("events.csv line " + std::to_string(line_no) +
                                  ": expected 9 fields, got " + std::to_string(f.size()));
    }
    Event e;
    e.time = parse_number<TimeNs>(f[0], line_no, "time");
    e.sequence = parse_number<std::uint64_t>(f[1], line_no, "seq");
    auto kind = parse_event_kind(f[2]);
    if (!kind) {
      throw std::invalid_argument("events.csv line " + std::to_string(line_no) + ": bad kind '" +
                                  std::string(f[2]) + "'");
    }
    e.kind = *kind;
    e.task = parse_number<TaskId>(f[3], line_no, "task");
    e.job = parse_number<std::uint64_t>(f[4], line_no, "job");
    e.processor = parse_number<ProcessorId>(f[5], line_no, "processor");
    if (!f[6].empty()) e.resource = parse_number<ResourceId>(f[6], line_no, "resource");
    if (!f[7].empty()) e.priority = Priority{parse_number<Priority::Rep>(f[7], line_no, "priority")};
    auto detail = parse_event_detail(f[8]);
    if (!detail) {
      throw std::invalid_argument("events.csv line " + std::to_string(line_no) +
                                  ": bad detail '" + std::string(f[8]) + "'");
    }
    e.detail = *detail;
    events.push_back(e);
  }
  return events;
}

void export_csv(const std::filesystem::path& path, std::string_view contents) {
  write_text_file(path, contents);
}

}  // namespace rtsim
